"""Small-step transition engine.

Each successor carries a :class:`TransitionLabel` naming the primitive rule
that fired (T, A, G, N, Gr, or GL for a guarded list) and, for inspection, the
chain of operator rules used to reach it (S, P, C, Co, Pc, Ln, Le).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GuardedTailFailure, TypeMismatch, UnsupportedConstruct
from .syntax import (
    E,
    Call,
    Choice,
    Cond,
    Conj,
    Disj,
    GuardedList,
    Neg,
    Par,
    Prim,
    Program,
    Seq,
    Terminated,
    Test,
    Truth,
    subst_agent,
)
from .terms import Atom, Definitions, Store, is_final, rewrite

PRIM_RULES = {"tell": "T", "ask": "A", "get": "G", "nask": "N", "gprim": "Gr"}


@dataclass(frozen=True)
class Fired:
    """A primitive as executed, with its arguments rewritten to final terms."""

    kind: str
    name: str
    args: tuple

    def __str__(self):
        if self.kind == "gprim" and not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"

    @property
    def rule(self) -> str:
        return PRIM_RULES[self.kind]


@dataclass(frozen=True)
class TransitionLabel:
    rule: str
    fired: tuple
    derivation: tuple = field(default=(), compare=False)

    @property
    def events(self) -> tuple:
        """Graphical primitives fired by this step, in order."""
        return tuple(f for f in self.fired if f.kind == "gprim")

    def __str__(self):
        return f"{self.rule} {' '.join(map(str, self.fired))}"


@dataclass(frozen=True)
class Config:
    agent: object
    store: Store

    @property
    def terminated(self) -> bool:
        return self.agent is E


# ---------------------------------------------------------------------------
# primitives and conditions


def step_primitive(p: Prim, store: Store, defs: Definitions):
    """Fire ``p`` on ``store``; return ``(store', label)`` or None when blocked."""
    args = tuple(rewrite(t, defs) for t in p.args)
    fired = Fired(p.kind, p.name, args)
    kind = p.kind
    if kind == "tell":
        out = store.add(args[0])
    elif kind == "get":
        out = store.remove(args[0])
        if out is None:
            return None
    elif kind == "ask":
        if store.count(args[0]) == 0:
            return None
        out = store
    elif kind == "nask":
        if store.count(args[0]) != 0:
            return None
        out = store
    else:
        out = store
    rule = PRIM_RULES[kind]
    return out, TransitionLabel(rule, (fired,), (rule,))


def fire_guarded_list(gl: GuardedList, store: Store, defs: Definitions):
    """Rule (GL): guard then whole tail in one step; None if the guard blocks."""
    first = step_primitive(gl.guard, store, defs)
    if first is None:
        return None
    store, label = first
    fired = list(label.fired)
    derivation = ["GL", label.rule]
    for i, p in enumerate(gl.tail):
        res = step_primitive(p, store, defs)
        if res is None:
            raise GuardedTailFailure(gl, i, store)
        store, lab = res
        fired.extend(lab.fired)
        derivation += ["Ln", lab.rule]
    derivation.append("Le")
    return store, TransitionLabel("GL", tuple(fired), tuple(derivation))


def eval_condition(c, defs: Definitions) -> bool:
    if isinstance(c, Test):
        left, right = rewrite(c.left, defs), rewrite(c.right, defs)
        if c.op == "=":
            return left == right
        if c.op == "!=":
            return left != right
        if not (isinstance(left, Atom) and isinstance(right, Atom)):
            raise TypeMismatch(f"ordering {c.op} between non-integers {left} and {right}")
        a, b = left.value, right.value
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[c.op]
    if isinstance(c, Conj):
        return eval_condition(c.left, defs) and eval_condition(c.right, defs)
    if isinstance(c, Disj):
        return eval_condition(c.left, defs) or eval_condition(c.right, defs)
    if isinstance(c, Neg):
        return not eval_condition(c.arg, defs)
    if isinstance(c, Truth):
        return c.value
    raise TypeMismatch(f"not a condition: {c!r}")


# ---------------------------------------------------------------------------
# agents


def simplify(a):
    """Eliminate terminated sub-agents: E;A -> A, E||A -> A, A||E -> A."""
    if isinstance(a, Seq):
        first = simplify(a.first)
        rest = simplify(a.rest)
        if first is E:
            return rest
        return a if (first is a.first and rest is a.rest) else Seq(first, rest)
    if isinstance(a, Par):
        left, right = simplify(a.left), simplify(a.right)
        if left is E:
            return right
        if right is E:
            return left
        return a if (left is a.left and right is a.right) else Par(left, right)
    if isinstance(a, Choice):
        left, right = simplify(a.left), simplify(a.right)
        return a if (left is a.left and right is a.right) else Choice(left, right)
    if isinstance(a, Cond):
        then = simplify(a.then)
        orelse = None if a.orelse is None else simplify(a.orelse)
        if then is a.then and orelse is a.orelse:
            return a
        return Cond(a.cond, then, orelse, a.line, a.col)
    return a


def _blocked_conditional():
    # "c -> s" with c false has no transition; the only place encoding that reading
    return []


class Engine:
    """Successor computation for one program, with memo tables for unfolding."""

    def __init__(self, prog: Program):
        self.prog = prog
        self.defs = prog.defs
        self._unfolded: dict = {}
        self._conds: dict = {}

    @classmethod
    def of(cls, prog: Program) -> "Engine":
        if prog._engine is None:
            prog._engine = cls(prog)
        return prog._engine

    def initial(self, store: Store | None = None) -> Config:
        main = self.prog.main if self.prog.main is not None else E
        return Config(self.activate(simplify(main)), store if store is not None else Store())

    def config(self, agent, store: Store) -> Config:
        return Config(self.activate(simplify(agent)), store)

    def successors(self, cfg: Config) -> list:
        return [
            (Config(self.activate(a), s), label)
            for a, s, label in self.steps(cfg.agent, cfg.store)
        ]

    def steps(self, a, store: Store) -> list:
        """All (agent', store', label) one-step derivatives of ``<a | store>``."""
        if isinstance(a, Prim):
            res = step_primitive(a, store, self.defs)
            return [] if res is None else [(E, res[0], res[1])]
        if isinstance(a, GuardedList):
            res = fire_guarded_list(a, store, self.defs)
            return [] if res is None else [(E, res[0], res[1])]
        if isinstance(a, Seq):
            rest = a.rest
            return [
                (rest if a2 is E else Seq(a2, rest), s2, _via("S", lab))
                for a2, s2, lab in self.steps(a.first, store)
            ]
        if isinstance(a, Par):
            left, right = a.left, a.right
            out = [
                (right if a2 is E else Par(a2, right), s2, _via("P", lab))
                for a2, s2, lab in self.steps(left, store)
            ]
            out += [
                (left if a2 is E else Par(left, a2), s2, _via("P", lab))
                for a2, s2, lab in self.steps(right, store)
            ]
            return out
        if isinstance(a, Choice):
            out = [(a2, s2, _via("C", lab)) for a2, s2, lab in self.steps(a.left, store)]
            out += [(a2, s2, _via("C", lab)) for a2, s2, lab in self.steps(a.right, store)]
            return out
        if isinstance(a, Cond):
            if self.holds(a.cond):
                branch = a.then
            elif a.orelse is not None:
                branch = a.orelse
            else:
                return _blocked_conditional()
            return [(a2, s2, _via("Co", lab)) for a2, s2, lab in self.steps(branch, store)]
        if isinstance(a, Call):
            body = self.unfold(a)
            return [(a2, s2, _via("Pc", lab)) for a2, s2, lab in self.steps(body, store)]
        if isinstance(a, Terminated):
            return []
        raise TypeError(f"not an agent: {a!r}")

    def holds(self, c) -> bool:
        v = self._conds.get(c)
        if v is None:
            v = self._conds[c] = eval_condition(c, self.defs)
        return v

    def unfold(self, call: Call):
        """Body of the called procedure with actual arguments substituted."""
        key = self.activate(call)
        body = self._unfolded.get(key)
        if body is None:
            proc = self.prog.procs[call.name]
            env = {name: arg for (name, _), arg in zip(proc.params, key.args)}
            body = self._unfolded[key] = simplify(subst_agent(proc.body, env))
        return body

    def activate(self, a):
        """Rewrite the arguments of calls that may be unfolded by the next step.

        Keeps configurations canonical: ``P(pred(3))`` and ``P(2)`` become
        the same state.  Calls under conditionals or sequential tails are left
        alone since their maps may be undefined on branches never taken.
        """
        if isinstance(a, Call):
            if all(is_final(t) for t in a.args):
                return a
            return Call(a.name, tuple(rewrite(t, self.defs) for t in a.args), a.line, a.col)
        if isinstance(a, Seq):
            first = self.activate(a.first)
            return a if first is a.first else Seq(first, a.rest)
        if isinstance(a, (Par, Choice)):
            left, right = self.activate(a.left), self.activate(a.right)
            return a if (left is a.left and right is a.right) else type(a)(left, right)
        return a


def _via(rule: str, label: TransitionLabel) -> TransitionLabel:
    return TransitionLabel(label.rule, label.fired, (rule,) + label.derivation)


def successors(cfg: Config, prog: Program) -> list:
    """Complete list of ``(Config, TransitionLabel)`` one-step successors."""
    return Engine.of(prog).successors(cfg)


def initial_config(prog: Program, store: Store | None = None) -> Config:
    return Engine.of(prog).initial(store)


# ---------------------------------------------------------------------------
# normal form


def normal_form(a):
    """Translate a finite agent into the shape ``N ::= p | p;A | N+N``."""
    if isinstance(a, (Prim, GuardedList)):
        return a
    if isinstance(a, Seq):
        return _seq_nf(normal_form(a.first), a.rest)
    if isinstance(a, Choice):
        return Choice(normal_form(a.left), normal_form(a.right))
    if isinstance(a, Par):
        return Choice(leftmerge(normal_form(a.left), a.right), leftmerge(normal_form(a.right), a.left))
    raise UnsupportedConstruct(f"normal form undefined for {type(a).__name__}")


def leftmerge(n, z):
    """``n`` moves first, then continues in parallel with ``z``."""
    if isinstance(n, (Prim, GuardedList)):
        return Seq(n, z)
    if isinstance(n, Seq):
        return Seq(n.first, Par(n.rest, z))
    if isinstance(n, Choice):
        return Choice(leftmerge(n.left, z), leftmerge(n.right, z))
    raise UnsupportedConstruct(f"leftmerge on non-normal agent {n!r}")


def _seq_nf(n, y):
    if isinstance(n, (Prim, GuardedList)):
        return Seq(n, y)
    if isinstance(n, Seq):
        return Seq(n.first, Seq(n.rest, y))
    return Choice(_seq_nf(n.left, y), _seq_nf(n.right, y))


def is_normal_form(a) -> bool:
    if isinstance(a, (Prim, GuardedList)):
        return True
    if isinstance(a, Seq):
        return isinstance(a.first, (Prim, GuardedList))
    if isinstance(a, Choice):
        return is_normal_form(a.left) and is_normal_form(a.right)
    return False
