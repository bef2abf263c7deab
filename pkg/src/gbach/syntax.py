"""Abstract syntax of agents, conditions and programs, with a canonical printer.

Every node is an immutable dataclass with a cached structural hash, so whole
agents can serve directly as (part of) visited-set keys.  Source positions
are carried in ``line`` fields excluded from comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Union

from .terms import Atom, Definitions, SiTerm, substitute


def _node(cls):
    """Turn ``cls`` into a frozen, slotted dataclass whose hash is computed once."""

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((tag,) + tuple(getattr(self, n) for n in keyed)))

    def __hash__(self):
        return self._hash

    # both must exist before decoration: dataclass() only wires up hooks it sees
    cls.__post_init__ = __post_init__
    cls.__hash__ = __hash__
    cls = dataclass(frozen=True, slots=True)(cls)
    keyed = tuple(f.name for f in fields(cls) if f.compare)
    tag = cls.__name__
    return cls


STORE_KINDS = ("tell", "ask", "nask", "get")


@_node
class Prim:
    """A primitive: ``tell/ask/nask/get(t)`` or a graphical primitive ``name(args)``."""

    kind: str  # tell | ask | nask | get | gprim
    name: str
    args: tuple
    line: int = field(default=0, compare=False, repr=False)
    col: int = field(default=0, compare=False, repr=False)
    _hash: int = field(init=False, repr=False, compare=False)

    @property
    def term(self) -> SiTerm:
        return self.args[0]

    @property
    def graphical(self) -> bool:
        return self.kind == "gprim"


def tell(t):
    return Prim("tell", "tell", (t,))


def ask(t):
    return Prim("ask", "ask", (t,))


def nask(t):
    return Prim("nask", "nask", (t,))


def get(t):
    return Prim("get", "get", (t,))


def gprim(name, *args):
    return Prim("gprim", name, tuple(args))


@_node
class GuardedList:
    guard: Prim
    tail: tuple
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Seq:
    first: "Agent"
    rest: "Agent"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Par:
    left: "Agent"
    right: "Agent"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Choice:
    left: "Agent"
    right: "Agent"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Cond:
    cond: "Condition"
    then: "Agent"
    orelse: Optional["Agent"] = None
    line: int = field(default=0, compare=False, repr=False)
    col: int = field(default=0, compare=False, repr=False)
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Call:
    name: str
    args: tuple
    line: int = field(default=0, compare=False, repr=False)
    col: int = field(default=0, compare=False, repr=False)
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Terminated:
    _hash: int = field(init=False, repr=False, compare=False)

    def __repr__(self):
        return "E"


E = Terminated()

Agent = Union[Prim, GuardedList, Seq, Par, Choice, Cond, Call, Terminated]


def seq(*agents):
    """Right-nested sequential composition of ``agents``."""
    out = agents[-1]
    for a in reversed(agents[:-1]):
        out = Seq(a, out)
    return out


def par(*agents):
    out = agents[-1]
    for a in reversed(agents[:-1]):
        out = Par(a, out)
    return out


def choice(*agents):
    out = agents[-1]
    for a in reversed(agents[:-1]):
        out = Choice(a, out)
    return out


# ---------------------------------------------------------------------------
# conditions (store independent)


@_node
class Test:
    op: str  # = != < <= > >=
    left: SiTerm
    right: SiTerm
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Conj:
    left: "Condition"
    right: "Condition"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Disj:
    left: "Condition"
    right: "Condition"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Neg:
    arg: "Condition"
    _hash: int = field(init=False, repr=False, compare=False)


@_node
class Truth:
    value: bool
    _hash: int = field(init=False, repr=False, compare=False)


Condition = Union[Test, Conj, Disj, Neg, Truth]


# ---------------------------------------------------------------------------
# substitution


def subst_agent(a, env: dict):
    if not env:
        return a
    if isinstance(a, Prim):
        return Prim(a.kind, a.name, tuple(substitute(t, env) for t in a.args), a.line, a.col)
    if isinstance(a, GuardedList):
        return GuardedList(subst_agent(a.guard, env), tuple(subst_agent(p, env) for p in a.tail))
    if isinstance(a, (Seq, Par, Choice)):
        l, r = children(a)
        return type(a)(subst_agent(l, env), subst_agent(r, env))
    if isinstance(a, Cond):
        return Cond(
            subst_cond(a.cond, env),
            subst_agent(a.then, env),
            None if a.orelse is None else subst_agent(a.orelse, env),
            a.line,
            a.col,
        )
    if isinstance(a, Call):
        return Call(a.name, tuple(substitute(t, env) for t in a.args))
    return a


def children(a):
    if isinstance(a, Seq):
        return (a.first, a.rest)
    if isinstance(a, (Par, Choice)):
        return (a.left, a.right)
    if isinstance(a, Cond):
        return (a.then,) if a.orelse is None else (a.then, a.orelse)
    return ()


def subst_cond(c, env):
    if isinstance(c, Test):
        return Test(c.op, substitute(c.left, env), substitute(c.right, env))
    if isinstance(c, (Conj, Disj)):
        return type(c)(subst_cond(c.left, env), subst_cond(c.right, env))
    if isinstance(c, Neg):
        return Neg(subst_cond(c.arg, env))
    return c


def walk(a):
    """Pre-order iteration over an agent and all of its sub-agents."""
    yield a
    if isinstance(a, GuardedList):
        yield a.guard
        yield from a.tail
    for c in children(a):
        yield from walk(c)


# ---------------------------------------------------------------------------
# programs


@dataclass
class ProcDef:
    name: str
    params: tuple  # ((name, set name), ...)
    body: Agent
    line: int = 0

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass
class Program:
    sets: list = field(default_factory=list)
    maps: list = field(default_factory=list)
    procs: dict = field(default_factory=dict)
    gprims: list = field(default_factory=list)
    main: Optional[Agent] = None
    formulas: dict = field(default_factory=dict)
    source: str = "<string>"
    _defs: Optional[Definitions] = field(default=None, repr=False, compare=False)
    _engine: object = field(default=None, repr=False, compare=False)

    @property
    def defs(self) -> Definitions:
        if self._defs is None:
            self._defs = Definitions(self.sets, self.maps)
        return self._defs

    def with_main(self, main: Agent) -> "Program":
        return Program(
            sets=self.sets,
            maps=self.maps,
            procs=self.procs,
            gprims=self.gprims,
            main=main,
            formulas=self.formulas,
            source=self.source,
        )

    def structure(self):
        """Comparable view of the program, ignoring source positions."""
        return (
            [(s.name, s.elements) for s in self.sets],
            [(m.name, m.domain, m.codomain, [(tuple(l), r) for l, r in m.equations]) for m in self.maps],
            [(p.name, p.params, p.body) for p in self.procs.values()],
            list(self.gprims),
            self.main,
            list(self.formulas.items()),
        )


# ---------------------------------------------------------------------------
# printing

_LEVEL = {Choice: 1, Par: 2, Seq: 3, Cond: 0}
_SYMBOL = {Choice: " + ", Par: " || ", Seq: "; "}


def format_prim(p: Prim) -> str:
    if p.kind == "gprim" and not p.args:
        return p.name
    return f"{p.name}({', '.join(map(format_term, p.args))})"


def format_term(t) -> str:
    return str(t).replace(",", ", ")


def format_agent(a, need: int = 0) -> str:
    level = _LEVEL.get(type(a), 4)
    if isinstance(a, (Seq, Par, Choice)):
        l, r = children(a)
        text = format_agent(l, level + 1) + _SYMBOL[type(a)] + format_agent(r, level)
    elif isinstance(a, Cond):
        text = f"{format_cond(a.cond)} -> {format_agent(a.then, 3)}"
        if a.orelse is not None:
            text += f" <> {format_agent(a.orelse, 3)}"
    elif isinstance(a, Prim):
        text = format_prim(a)
    elif isinstance(a, GuardedList):
        text = "[" + format_prim(a.guard)
        if a.tail:
            text += " -> " + ", ".join(format_prim(p) for p in a.tail)
        text += "]"
    elif isinstance(a, Call):
        text = f"{a.name}({', '.join(map(format_term, a.args))})"
    elif isinstance(a, Terminated):
        text = "E"
    else:
        raise TypeError(f"not an agent: {a!r}")
    return f"({text})" if level < need else text


_CLEVEL = {Disj: 1, Conj: 2, Neg: 3}


def format_cond(c, need: int = 0) -> str:
    level = _CLEVEL.get(type(c), 4)
    if isinstance(c, Disj):
        text = f"{format_cond(c.left, 2)} | {format_cond(c.right, 1)}"
    elif isinstance(c, Conj):
        text = f"{format_cond(c.left, 3)} & {format_cond(c.right, 2)}"
    elif isinstance(c, Neg):
        text = f"!{format_cond(c.arg, 5)}"
    elif isinstance(c, Truth):
        text = "true" if c.value else "false"
    else:
        text = f"{format_term(c.left)} {c.op} {format_term(c.right)}"
    return f"({text})" if level < need else text


def _format_elem(e) -> str:
    return str(e.value) if isinstance(e, Atom) else str(e)


def format_program(prog: Program) -> str:
    from .logic import format_tf

    out = []
    if prog.gprims:
        out.append(f"gprim {', '.join(prog.gprims)}.")
        out.append("")
    for s in prog.sets:
        out.append(f"eset {s.name} = {{{', '.join(_format_elem(e) for e in s.elements)}}}.")
    if prog.sets:
        out.append("")
    for m in prog.maps:
        out.append(f"map {m.name} : {' # '.join(m.domain)} -> {m.codomain}.")
        if m.equations:
            out.append("eqn")
            for lhs, rhs in m.equations:
                out.append(f"  {m.name}({', '.join(map(format_term, lhs))}) = {format_term(rhs)}.")
        out.append("")
    for p in prog.procs.values():
        params = ", ".join(f"{n}: {s}" for n, s in p.params)
        out.append(f"proc {p.name}({params}) =")
        out.append(f"  {format_agent(p.body)}.")
        out.append("")
    if prog.main is not None:
        out.append(f"run {format_agent(prog.main)}.")
        out.append("")
    for name, tf in prog.formulas.items():
        out.append(f"formula {name} = {format_tf(tf)}.")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
