"""Histories, contractions, bounded refinement checking and guarded-list introduction.

Everything here is bounded: histories are enumerated up to a depth and the
refinement check is evidence at that depth, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .errors import GBachError
from .logic import counted_terms, eval_prop
from .semantics import Engine
from .syntax import (
    Choice,
    Cond,
    GuardedList,
    Par,
    Prim,
    ProcDef,
    Program,
    Seq,
    format_agent,
    walk,
)
from .terms import Atom, Compound, MapApp, Store, Token, Var

SUCCESS = "+"
FAILURE = "-"
ONGOING = "..."

DEFAULT_HISTORY_CAP = 1_000_000


class HistoryBudgetExceeded(GBachError):
    pass


@dataclass(frozen=True)
class History:
    stores: tuple
    terminal: str  # SUCCESS | FAILURE | ONGOING

    @property
    def finite(self) -> bool:
        return self.terminal != ONGOING

    def __len__(self):
        return len(self.stores)

    def __str__(self):
        mark = {SUCCESS: "d+", FAILURE: "d-", ONGOING: "..."}[self.terminal]
        return " . ".join([s.text() for s in self.stores] + [mark])


def histories(agent, store: Store, prog: Program, depth: Optional[int] = None,
              cap: int = DEFAULT_HISTORY_CAP) -> set:
    """All histories of ``<agent | store>`` with at most ``depth`` transitions.

    Paths still able to move at the bound are closed with ONGOING.  With
    ``depth=None`` the agent must have only finite computations.
    """
    engine = Engine.of(prog)
    out: set = set()

    def go(cfg, path):
        succs = engine.successors(cfg)
        if not succs:
            out.add(History(tuple(path), SUCCESS if cfg.terminated else FAILURE))
        elif depth is not None and len(path) - 1 >= depth:
            out.add(History(tuple(path), ONGOING))
        else:
            for nxt, _ in succs:
                path.append(nxt.store)
                go(nxt, path)
                path.pop()
        if len(out) > cap:
            raise HistoryBudgetExceeded(f"more than {cap} histories")

    go(engine.config(agent, store), [store])
    return out


def final_observables_of(hs) -> set:
    """``(final store, mark)`` pairs of the finite histories in ``hs``."""
    return {(h.stores[-1], h.terminal) for h in hs if h.finite}


# ---------------------------------------------------------------------------
# contractions


@dataclass(frozen=True)
class ContractionWitness:
    indices: tuple  # position in h of each store of h_c, strictly increasing
    removed: tuple  # removed[i]: stores of h deleted just before h_c[i]
    trailing: tuple = ()  # stores of h deleted after the last kept one


def _witness(h: History, idx) -> ContractionWitness:
    removed, prev = [], -1
    for j in idx:
        removed.append(tuple(h.stores[prev + 1:j]))
        prev = j
    return ContractionWitness(tuple(idx), tuple(removed), tuple(h.stores[prev + 1:]))


def _terminals_compatible(hc: History, h: History) -> bool:
    # a truncated history may stand for any longer computation
    return hc.terminal == ONGOING or hc.terminal == h.terminal


def is_contraction(hc: History, h: History) -> Optional[ContractionWitness]:
    """Leftmost embedding of ``hc``'s stores into ``h``'s, or None."""
    if not _terminals_compatible(hc, h):
        return None
    idx, j = [], 0
    for s in hc.stores:
        while j < len(h.stores) and h.stores[j] != s:
            j += 1
        if j == len(h.stores):
            return None
        idx.append(j)
        j += 1
    return _witness(h, idx)


def is_F_preserving(hc: History, h: History, witness: ContractionWitness, pf) -> bool:
    """Every removed store agrees on ``pf`` with the kept store that follows it."""
    if witness.trailing and hc.finite:
        return False
    for kept, segment in zip(hc.stores, witness.removed):
        v = eval_prop(pf, kept)
        if any(eval_prop(pf, t) != v for t in segment):
            return False
    return True


def find_F_preserving(hc: History, h: History, pf) -> Optional[ContractionWitness]:
    """Search every embedding of ``hc`` into ``h`` for an F-preserving one."""
    if not _terminals_compatible(hc, h):
        return None
    a, b = hc.stores, h.stores
    vals = [eval_prop(pf, s) for s in b]
    n, m = len(a), len(b)

    @lru_cache(maxsize=None)
    def place(i, start):
        # place a[i] at some j >= start; removed segment b[start:j] must agree with b[j]
        if i == n:
            return () if (start == m or not hc.finite) else None
        for j in range(start, m):
            if b[j] == a[i] and all(vals[k] == vals[j] for k in range(start, j)):
                rest = place(i + 1, j + 1)
                if rest is not None:
                    return (j,) + rest
        return None

    idx = place(0, 0)
    return None if idx is None else _witness(h, idx)


# ---------------------------------------------------------------------------
# refinement


@dataclass
class RefinementResult:
    holds: bool
    depth: int
    counterexample: Optional[tuple] = None  # (initial store, uncovered history)

    def __bool__(self):
        return self.holds

    def __str__(self):
        if self.holds:
            return f"refines (bounded evidence, depth {self.depth})"
        store, h = self.counterexample
        return f"does not refine from {store.text()}: {h}"


def _max_tail(agent, prog: Program) -> int:
    bodies = [agent] + [p.body for p in prog.procs.values()]
    return max((len(a.tail) for b in bodies for a in walk(b) if isinstance(a, GuardedList)), default=0)


def check_refinement(a, b, stores, prog: Program, depth: int, b_depth: Optional[int] = None,
                     cap: int = DEFAULT_HISTORY_CAP) -> RefinementResult:
    """Every depth-bounded history of ``a`` must contract some history of ``b``.

    ``b`` is explored deeper (``depth * (1 + longest guarded tail in a)`` by
    default) so that one atomic step of ``a`` can be matched by several steps
    of ``b``.
    """
    if b_depth is None:
        b_depth = depth * (1 + _max_tail(a, prog))
    for store in stores:
        ha = histories(a, store, prog, depth, cap)
        hb = histories(b, store, prog, b_depth, cap)
        for h in sorted(ha, key=str):
            if not any(is_contraction(h, g) for g in hb):
                return RefinementResult(False, depth, (store, h))
    return RefinementResult(True, depth)


def check_F_preserving(a, b, stores, prog: Program, pf, depth: int, b_depth: Optional[int] = None,
                       cap: int = DEFAULT_HISTORY_CAP) -> RefinementResult:
    """As :func:`check_refinement` but requiring F-preserving contractions."""
    if b_depth is None:
        b_depth = depth * (1 + _max_tail(a, prog))
    for store in stores:
        ha = histories(a, store, prog, depth, cap)
        hb = histories(b, store, prog, b_depth, cap)
        for h in sorted(ha, key=str):
            if not any(find_F_preserving(h, g, pf) for g in hb):
                return RefinementResult(False, depth, (store, h))
    return RefinementResult(True, depth)


# ---------------------------------------------------------------------------
# guarded-list introduction


def syntactic_guardable(chain) -> bool:
    """True iff every primitive after the first is a tell or a graphical primitive."""
    prims = _seq_items(chain) if isinstance(chain, Seq) else list(chain)
    if not prims or not all(isinstance(p, Prim) for p in prims):
        return False
    return all(p.kind in ("tell", "gprim") for p in prims[1:])


@dataclass
class Site:
    source: str
    line: int
    criterion: str  # P1.1 | P1.2
    action: str  # transformed | skipped | forced
    chain: str
    note: str = ""

    def __str__(self):
        text = f"{self.source}:{self.line}: {self.criterion} {self.action}: {self.chain}"
        return text + (f"  ({self.note})" if self.note else "")


@dataclass
class TransformReport:
    sites: list = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return any(s.action in ("transformed", "forced") for s in self.sites)

    def text(self) -> str:
        return "".join(str(s) + "\n" for s in self.sites)


_UNKNOWN = None  # head set that could be anything


class _Heads:
    """Symbolic over-approximation of the (functor, arity) a term can reduce to."""

    def __init__(self, prog: Program):
        self.sets = {s.name: s for s in prog.sets}
        self.maps = {m.name: m for m in prog.maps}

    def of_set(self, name):
        s = self.sets.get(name)
        if s is None:
            return _UNKNOWN
        return frozenset(self.of(e) for e in s.elements)

    @staticmethod
    def of(t):
        if isinstance(t, Atom):
            return ("#int", 0)
        if isinstance(t, Token):
            return (t.name, 0)
        if isinstance(t, Compound):
            return (t.functor, len(t.args))
        return _UNKNOWN

    def heads(self, t, env) -> Optional[frozenset]:
        if isinstance(t, Var):
            return self.of_set(env[t.name]) if t.name in env else _UNKNOWN
        if isinstance(t, MapApp):
            m = self.maps.get(t.name)
            return _UNKNOWN if m is None else self.of_set(m.codomain)
        return frozenset([self.of(t)])


def _seq_items(a) -> list:
    if isinstance(a, Seq):
        return _seq_items(a.first) + _seq_items(a.rest)
    return [a]


def transform_to_guarded(prog: Program, pf, force: bool = False):
    """Wrap maximal chains ``p; p1; ...; pn`` (tail all tell/graphical) into guarded lists.

    A chain is transformed automatically only when the heads of its tail tell
    arguments are disjoint from the terms counted in ``pf`` and from every
    ``nask`` argument of the program; otherwise it is skipped (or wrapped
    anyway with ``force``).  Returns ``(Program, TransformReport)``.
    """
    heads = _Heads(prog)
    counted = set()
    for t in counted_terms(pf):
        h = heads.heads(t, {})
        counted |= h if h is not _UNKNOWN else {("?", -1)}
    bodies = [({n: s for n, s in p.params}, p.body) for p in prog.procs.values()]
    if prog.main is not None:
        bodies.append(({}, prog.main))
    nasked, nask_unknown = set(), False
    for env, body in bodies:
        for x in walk(body):
            if isinstance(x, Prim) and x.kind == "nask":
                h = heads.heads(x.args[0], env)
                if h is _UNKNOWN:
                    nask_unknown = True
                else:
                    nasked |= h
    report = TransformReport()
    ctx = _Ctx(prog.source, heads, counted, nasked, nask_unknown, force, report)
    procs = {}
    for name, p in prog.procs.items():
        env = {n: s for n, s in p.params}
        procs[name] = ProcDef(p.name, p.params, ctx.agent(p.body, env), p.line)
    main = None if prog.main is None else ctx.agent(prog.main, {})
    out = Program(
        sets=prog.sets,
        maps=prog.maps,
        procs=procs,
        gprims=prog.gprims,
        main=main,
        formulas=prog.formulas,
        source=prog.source,
    )
    return out, report


@dataclass
class _Ctx:
    source: str
    heads: _Heads
    counted: set
    nasked: set
    nask_unknown: bool
    force: bool
    report: TransformReport

    def agent(self, a, env):
        if isinstance(a, Seq):
            items = _seq_items(a)
            new = self.chains([self.agent(x, env) if not isinstance(x, Prim) else x for x in items], env)
            if len(new) == len(items) and all(x is y for x, y in zip(new, items)):
                return a
            out = new[-1]
            for x in reversed(new[:-1]):
                out = Seq(x, out)
            return out
        if isinstance(a, (Par, Choice)):
            l, r = self.agent(a.left, env), self.agent(a.right, env)
            return a if (l is a.left and r is a.right) else type(a)(l, r)
        if isinstance(a, Cond):
            then = self.agent(a.then, env)
            orelse = None if a.orelse is None else self.agent(a.orelse, env)
            if then is a.then and orelse is a.orelse:
                return a
            return Cond(a.cond, then, orelse, a.line, a.col)
        return a

    def chains(self, items, env):
        out, i = [], 0
        while i < len(items):
            p = items[i]
            j = i + 1
            if isinstance(p, Prim):
                while j < len(items) and isinstance(items[j], Prim) and items[j].kind in ("tell", "gprim"):
                    j += 1
            if j - i < 2:
                out.append(p)
                i += 1
                continue
            tail = tuple(items[i + 1:j])
            if self.decide(p, tail, env):
                out.append(GuardedList(p, tail))
            else:
                out.extend(items[i:j])
            i = j
        return out

    def decide(self, guard, tail, env) -> bool:
        told = set()
        unknown = False
        for q in tail:
            if q.kind == "tell":
                h = self.heads.heads(q.args[0], env)
                if h is _UNKNOWN:
                    unknown = True
                else:
                    told |= h
        notes = []
        if unknown:
            notes.append("tail tells a term of unknown shape")
        if told and (told & self.counted or ("?", -1) in self.counted):
            notes.append("tail may tell a term counted in the formula")
        if told and (self.nask_unknown or told & self.nasked):
            notes.append("tail may tell a term tested by nask")
        g = self.heads.heads(guard.args[0], env) if guard.kind != "gprim" else frozenset()
        guard_note = ""
        if g is _UNKNOWN or (g and g & self.counted):
            guard_note = "guard may affect the formula"
        text = format_agent(GuardedList(guard, tail))
        if not notes:
            self.report.sites.append(Site(self.source, guard.line, "P1.2", "transformed", text, guard_note))
            return True
        note = "; ".join(notes)
        if self.force:
            self.report.sites.append(Site(self.source, guard.line, "P1.1", "forced", text,
                                          note + "; only reachability from the guarded form carries over"))
            return True
        self.report.sites.append(Site(self.source, guard.line, "P1.1", "skipped", text, note))
        return False
