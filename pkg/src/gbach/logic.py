"""Propositional state formulae over occurrence counts and the temporal fragment.

    TF ::= PF | Next TF | PF Until TF        Reach(PF) == true Until PF
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import TypeMismatch
from .terms import Definitions, SiTerm, Store, rewrite


@dataclass(frozen=True)
class Count:
    """``#t``: number of occurrences of ``t`` in the store."""

    term: SiTerm


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Arith:
    op: str  # + - *
    left: "IntExpr"
    right: "IntExpr"


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: "IntExpr"
    right: "IntExpr"


@dataclass(frozen=True)
class And:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class Or:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class Not:
    arg: "PropFormula"


@dataclass(frozen=True)
class Const:
    value: bool


IntExpr = Union[Count, Num, Arith]
PropFormula = Union[Cmp, And, Or, Not, Const]

TRUE = Const(True)


@dataclass(frozen=True)
class Prop:
    pf: PropFormula


@dataclass(frozen=True)
class Next:
    arg: "TemporalFormula"


@dataclass(frozen=True)
class Until:
    hold: PropFormula
    goal: "TemporalFormula"


TemporalFormula = Union[Prop, Next, Until]


COMPARE = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}

_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def eval_int(e: IntExpr, store: Store) -> int:
    if isinstance(e, Count):
        return store.count(e.term)
    if isinstance(e, Num):
        return e.value
    return _ARITH[e.op](eval_int(e.left, store), eval_int(e.right, store))


def eval_prop(pf: PropFormula, store: Store) -> bool:
    if isinstance(pf, Cmp):
        return COMPARE[pf.op](eval_int(pf.left, store), eval_int(pf.right, store))
    if isinstance(pf, And):
        return eval_prop(pf.left, store) and eval_prop(pf.right, store)
    if isinstance(pf, Or):
        return eval_prop(pf.left, store) or eval_prop(pf.right, store)
    if isinstance(pf, Not):
        return not eval_prop(pf.arg, store)
    if isinstance(pf, Const):
        return pf.value
    raise TypeMismatch(f"not a propositional formula: {pf!r}")


def desugar_reach(pf: PropFormula) -> Until:
    return Until(TRUE, Prop(pf))


def is_reach(tf: TemporalFormula) -> bool:
    return isinstance(tf, Until) and tf.hold == TRUE and isinstance(tf.goal, Prop)


def as_temporal(f) -> TemporalFormula:
    """Lift a bare propositional formula to ``Prop``; leave temporal ones alone."""
    return f if isinstance(f, (Prop, Next, Until)) else Prop(f)


def counted_terms(f) -> list:
    """Every term appearing under ``#`` in a propositional or temporal formula."""
    out = []

    def visit(x):
        if isinstance(x, Count):
            out.append(x.term)
        elif isinstance(x, (Arith, Cmp, And, Or, Until)):
            visit(x.left if not isinstance(x, Until) else x.hold)
            visit(x.right if not isinstance(x, Until) else x.goal)
        elif isinstance(x, (Not, Next)):
            visit(x.arg)
        elif isinstance(x, Prop):
            visit(x.pf)

    visit(f)
    return out


def resolve_formula(f, defs: Definitions):
    """Rewrite every counted term to its final form (load-time validation)."""
    if isinstance(f, Count):
        return Count(rewrite(f.term, defs))
    if isinstance(f, (Arith, Cmp)):
        return type(f)(f.op, resolve_formula(f.left, defs), resolve_formula(f.right, defs))
    if isinstance(f, (And, Or)):
        return type(f)(resolve_formula(f.left, defs), resolve_formula(f.right, defs))
    if isinstance(f, Not):
        return Not(resolve_formula(f.arg, defs))
    if isinstance(f, Prop):
        return Prop(resolve_formula(f.pf, defs))
    if isinstance(f, Next):
        return Next(resolve_formula(f.arg, defs))
    if isinstance(f, Until):
        return Until(resolve_formula(f.hold, defs), resolve_formula(f.goal, defs))
    return f


# ---------------------------------------------------------------------------
# printing

_PREC = {Or: 1, And: 2, Not: 3, Cmp: 4}
_IPREC = {"+": 5, "-": 5, "*": 6}


def _fmt_int(e, need=0) -> str:
    if isinstance(e, Count):
        return "#" + str(e.term).replace(",", ", ")
    if isinstance(e, Num):
        text = str(e.value)
        return f"({text})" if e.value < 0 and need > 0 else text
    level = _IPREC[e.op]
    text = f"{_fmt_int(e.left, level)} {e.op} {_fmt_int(e.right, level + 1)}"
    return f"({text})" if level < need else text


def format_pf(pf, need=0) -> str:
    if isinstance(pf, Const):
        return "true" if pf.value else "false"
    level = _PREC[type(pf)]
    if isinstance(pf, Or):
        text = f"{format_pf(pf.left, 1)} | {format_pf(pf.right, 2)}"
    elif isinstance(pf, And):
        text = f"{format_pf(pf.left, 2)} & {format_pf(pf.right, 3)}"
    elif isinstance(pf, Not):
        text = f"!{format_pf(pf.arg, 5)}"
    else:
        text = f"{_fmt_int(pf.left)} {pf.op} {_fmt_int(pf.right)}"
    return f"({text})" if level < need else text


def format_tf(tf) -> str:
    if isinstance(tf, Prop):
        return format_pf(tf.pf)
    if isinstance(tf, Next):
        return f"Next {format_tf(tf.arg)}"
    if is_reach(tf):
        return f"Reach({format_pf(tf.goal.pf)})"
    if isinstance(tf, Until):
        return f"{format_pf(tf.hold, 5)} Until {format_tf(tf.goal)}"
    return format_pf(tf)
