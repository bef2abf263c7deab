"""Exception hierarchy shared by every layer of the toolkit."""

from __future__ import annotations


class GBachError(Exception):
    """Base class for all errors raised by gbach."""


class UndefinedMapApplication(GBachError):
    def __init__(self, term):
        self.term = term
        super().__init__(f"no equation matches map application {term}")


class RewriteBudgetExceeded(GBachError):
    def __init__(self, term, budget: int):
        self.term = term
        self.budget = budget
        super().__init__(f"rewriting {term} exceeded {budget} steps")


class TypeMismatch(GBachError):
    pass


class GuardedTailFailure(GBachError):
    """A guarded list fired its guard but a tail primitive could not execute."""

    def __init__(self, glist, index: int, store):
        self.glist = glist
        self.index = index
        self.store = store
        super().__init__(
            f"tail primitive #{index + 1} of {glist} blocked after the guard succeeded"
        )


class UnsupportedConstruct(GBachError):
    pass


class ProgramError(GBachError):
    """Raised when a source text fails to parse or to pass static checks."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = [str(d) for d in self.diagnostics]
        super().__init__("\n".join(lines) if lines else "invalid program")


class ReplayDivergence(GBachError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"trace diverges at step {index}: {reason}")


class InvalidPlacement(GBachError):
    pass


class IllegalMove(GBachError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"illegal move at step {index}: {reason}")
