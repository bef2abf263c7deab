"""Si-terms, set and map definitions, the rewriting relation and the store.

Terms are immutable and cache their hash, since they are hashed over and
over again while exploring state spaces.  Rewriting is innermost-first,
arguments left to right, and memoised per set of definitions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import RewriteBudgetExceeded, UndefinedMapApplication

DEFAULT_REWRITE_BUDGET = 10_000


@dataclass(frozen=True, slots=True)
class Atom:
    """Integer set element."""

    value: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((Atom, self.value)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Token:
    """Flat token; also used for non-numeric set elements."""

    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((Token, self.name)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((Compound, self.functor, self.args)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"{self.functor}({','.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class MapApp:
    """Application of a user-defined map, eliminated by rewriting."""

    name: str
    args: tuple
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((MapApp, self.name, self.args)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class Var:
    """Formal procedure parameter; replaced by substitution before use."""

    name: str
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((Var, self.name)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return self.name


SiTerm = Union[Atom, Token, Compound, MapApp, Var]


def is_final(t: SiTerm) -> bool:
    if isinstance(t, (Atom, Token)):
        return True
    if isinstance(t, Compound):
        return all(is_final(a) for a in t.args)
    return False


def is_ground(t: SiTerm) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, (Compound, MapApp)):
        return all(is_ground(a) for a in t.args)
    return True


def substitute(t: SiTerm, env: dict) -> SiTerm:
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, env) for a in t.args))
    if isinstance(t, MapApp):
        return MapApp(t.name, tuple(substitute(a, env) for a in t.args))
    return t


def term_key(t: SiTerm) -> tuple:
    """Total structural order on final terms: integers, then tokens, then compounds."""
    if isinstance(t, Atom):
        return (0, t.value)
    if isinstance(t, Token):
        return (1, t.name)
    if isinstance(t, Compound):
        return (2, t.functor, len(t.args), tuple(term_key(a) for a in t.args))
    raise TypeError(f"cannot order non-final term {t}")


# ---------------------------------------------------------------------------
# definitions


@dataclass
class SetDef:
    name: str
    elements: tuple
    line: int = 0

    def is_numeric(self) -> bool:
        return all(isinstance(e, Atom) for e in self.elements)


@dataclass
class MapDef:
    name: str
    domain: tuple  # set names, one per argument
    codomain: str
    equations: list = field(default_factory=list)  # [(lhs args tuple, rhs term)]
    line: int = 0
    eqn_lines: list = field(default_factory=list)

    @property
    def arity(self) -> int:
        return len(self.domain)


class Definitions:
    """Sets and maps of a program, plus the memo table of the rewriter."""

    def __init__(self, sets=(), maps=(), budget: int = DEFAULT_REWRITE_BUDGET):
        self.sets = {s.name: s for s in sets}
        self.maps = {m.name: m for m in maps}
        self.budget = budget
        self._tables = {}
        for m in self.maps.values():
            table = {}
            for lhs, rhs in m.equations:
                # first equation wins; overlaps are reported by the static checker
                table.setdefault(tuple(lhs), rhs)
            self._tables[m.name] = table
        self._memo: dict = {}

    def lookup(self, name: str, args: tuple):
        return self._tables.get(name, {}).get(args)


def rewrite(term: SiTerm, defs: Definitions, budget: int | None = None) -> SiTerm:
    """Reduce ``term`` to its final form using the map equations of ``defs``."""
    if isinstance(term, (Atom, Token)):
        return term
    memo = defs._memo
    hit = memo.get(term)
    if hit is not None:
        return hit
    steps = [0]
    limit = defs.budget if budget is None else budget
    result = _rewrite(term, defs, steps, limit, term)
    memo[term] = result
    return result


def _rewrite(t, defs, steps, limit, root):
    while True:
        if isinstance(t, (Atom, Token)):
            return t
        if isinstance(t, Var):
            raise UndefinedMapApplication(t)
        args = tuple(_rewrite(a, defs, steps, limit, root) for a in t.args)
        if isinstance(t, Compound):
            return t if args == t.args else Compound(t.functor, args)
        rhs = defs.lookup(t.name, args)
        if rhs is None:
            raise UndefinedMapApplication(MapApp(t.name, args))
        steps[0] += 1
        if steps[0] > limit:
            raise RewriteBudgetExceeded(root, limit)
        t = rhs


# ---------------------------------------------------------------------------
# store


class Store:
    """Immutable multiset of final si-terms."""

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts=None):
        self._counts = dict(counts) if counts else {}
        self._hash = None

    @classmethod
    def of(cls, terms: Iterable[SiTerm]) -> "Store":
        return cls(Counter(terms))

    def count(self, t: SiTerm) -> int:
        return self._counts.get(t, 0)

    def add(self, t: SiTerm) -> "Store":
        counts = dict(self._counts)
        counts[t] = counts.get(t, 0) + 1
        return Store._wrap(counts)

    def remove(self, t: SiTerm) -> "Store | None":
        n = self._counts.get(t, 0)
        if n == 0:
            return None
        counts = dict(self._counts)
        if n == 1:
            del counts[t]
        else:
            counts[t] = n - 1
        return Store._wrap(counts)

    @classmethod
    def _wrap(cls, counts):
        s = cls.__new__(cls)
        s._counts = counts
        s._hash = None
        return s

    def items(self):
        """(term, count) pairs in canonical order."""
        return sorted(self._counts.items(), key=lambda kv: term_key(kv[0]))

    def terms(self) -> Iterator[SiTerm]:
        for t, n in self.items():
            for _ in range(n):
                yield t

    def size(self) -> int:
        return sum(self._counts.values())

    def distinct(self) -> int:
        return len(self._counts)

    def __contains__(self, t):
        return t in self._counts

    def __len__(self):
        return self.size()

    def __eq__(self, other):
        return isinstance(other, Store) and self._counts == other._counts

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def __repr__(self):
        return f"Store({self.text()})"

    def text(self) -> str:
        return "{" + ", ".join(f"{t}:{n}" for t, n in self.items()) + "}"


EMPTY_STORE = Store()


def store_add(store: Store, t: SiTerm) -> Store:
    return store.add(t)


def store_remove(store: Store, t: SiTerm) -> Store | None:
    return store.remove(t)


def store_count(store: Store, t: SiTerm) -> int:
    return store.count(t)


def canonical_encode(store: Store) -> bytes:
    """Injective byte encoding of a store, independent of insertion order."""
    return ";".join(f"{t}*{n}" for t, n in store.items()).encode()
