"""Breadth-first explicit-state model checking with replayable witnesses.

Formulas are read existentially: a verdict ``holds`` means *some* computation
from the initial configuration satisfies the formula.  The search runs over
pairs (configuration, pending obligation); for ``Reach`` the obligation never
changes, so this is plain BFS over configurations with the target tested on
every newly discovered state.
"""

from __future__ import annotations

import logging
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .errors import GBachError, ReplayDivergence
from .logic import Next, Prop, Until, as_temporal, eval_prop
from .semantics import Engine, Fired, TransitionLabel
from .syntax import Program
from .terms import Store, canonical_encode

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 10_000_000

HOLDS = "holds"
REFUTED = "refuted"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Limits:
    max_states: Optional[int] = None
    max_depth: Optional[int] = None

    def states_cap(self) -> int:
        if self.max_states is not None:
            return self.max_states
        env = os.environ.get("GBACH_MAX_STATES")
        return int(env) if env else DEFAULT_MAX_STATES


@dataclass
class Trace:
    """Initial store plus the (label, resulting store) of every step."""

    initial: Store
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def stores(self) -> list:
        return [self.initial] + [s for _, s in self.steps]

    def labels(self) -> list:
        return [l for l, _ in self.steps]

    def events(self) -> list:
        return [e for l, _ in self.steps for e in l.events]

    def expand_guarded(self, defs) -> "Trace":
        """Split every GL step into its constituent primitive steps."""
        from .semantics import PRIM_RULES
        from .syntax import Prim
        from .semantics import step_primitive

        out = Trace(self.initial)
        store = self.initial
        for label, snap in self.steps:
            if label.rule != "GL":
                out.steps.append((label, snap))
                store = snap
                continue
            for f in label.fired:
                res = step_primitive(Prim(f.kind, f.name, f.args), store, defs)
                if res is None:
                    raise ReplayDivergence(len(out.steps), f"{f} blocked while expanding {label}")
                store = res[0]
                out.steps.append((TransitionLabel(PRIM_RULES[f.kind], (f,)), store))
            if store != snap:
                raise ReplayDivergence(len(out.steps), "expanded guarded list disagrees with snapshot")
        return out

    def to_text(self) -> str:
        lines = ["TRACE v1", ("INIT " + canonical_encode(self.initial).decode()).rstrip()]
        prev = self.initial
        for i, (label, snap) in enumerate(self.steps, 1):
            lines.append(f"STEP {i} {label.rule} {' '.join(map(str, label.fired))} | {_delta(prev, snap)}".rstrip())
            prev = snap
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Trace":
        from .parser import parse_term

        lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
        if not lines or lines[0].strip() != "TRACE v1":
            raise ValueError("not a trace file")
        init = lines[1]
        if not init.startswith("INIT"):
            raise ValueError("missing INIT line")
        counts = {}
        body = init[4:].strip()
        if body:
            for item in body.split(";"):
                term, n = item.rsplit("*", 1)
                counts[parse_term(term)] = int(n)
        store = Store(counts)
        trace = cls(store)
        for line in lines[2:]:
            head, _, delta = line.rstrip().partition(" |")
            parts = head.split()
            if parts[0] != "STEP":
                raise ValueError(f"bad trace line: {line}")
            rule = parts[2]
            fired = tuple(_parse_fired(p, parse_term) for p in parts[3:])
            for d in delta.split():
                t = parse_term(d[1:])
                store = store.add(t) if d[0] == "+" else store.remove(t)
                if store is None:
                    raise ValueError(f"delta removes absent term in: {line}")
            trace.steps.append((TransitionLabel(rule, fired), store))
        return trace


def _delta(before: Store, after: Store) -> str:
    out = []
    for t, n in before.items():
        k = n - after.count(t)
        out += [f"-{t}"] * max(k, 0)
    for t, n in after.items():
        k = n - before.count(t)
        out += [f"+{t}"] * max(k, 0)
    return " ".join(out)


def _parse_fired(text: str, parse_term) -> Fired:
    name, paren, rest = text.partition("(")
    kind = name if name in ("tell", "ask", "nask", "get") else "gprim"
    if not paren:
        return Fired(kind, name, ())
    term = parse_term("f(" + rest)
    return Fired(kind, name, term.args)


@dataclass
class Verdict:
    status: str  # holds | refuted | unknown
    trace: Optional[Trace] = None
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def __str__(self):
        return self.status if not self.reason else f"{self.status} ({self.reason})"


@dataclass
class ExplorationStats:
    states_expanded: int = 0
    states_discovered: int = 0
    max_frontier: int = 0
    wall_ms: float = 0.0
    bound: str = "complete"  # complete | max-states | max-depth | error | stopped
    edges: int = 0

    def fields(self, verdict: Verdict | None = None) -> dict:
        out = {}
        if verdict is not None:
            out["verdict"] = verdict.status
        out["states_expanded"] = self.states_expanded
        out["states_discovered"] = self.states_discovered
        out["max_frontier"] = self.max_frontier
        out["wall_ms"] = round(self.wall_ms, 3)
        if verdict is not None:
            out["witness_len"] = len(verdict.trace) if verdict.trace is not None else -1
        out["bound"] = self.bound
        return out


def format_report(verdict: Verdict, stats: ExplorationStats) -> str:
    lines = [f"{k}: {v}" for k, v in stats.fields(verdict).items()]
    if verdict.reason:
        lines.append(f"reason: {verdict.reason}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Inverse of :func:`format_report` (numbers come back as int/float)."""
    out = {}
    for line in text.splitlines():
        if ":" not in line:
            continue
        k, _, v = line.partition(":")
        v = v.strip()
        try:
            out[k.strip()] = int(v)
        except ValueError:
            try:
                out[k.strip()] = float(v)
            except ValueError:
                out[k.strip()] = v
    return out


# ---------------------------------------------------------------------------
# search


def _closure(store: Store, f):
    """Return (accepted, continuations) for obligation ``f`` at a state."""
    if isinstance(f, Prop):
        return eval_prop(f.pf, store), ()
    if isinstance(f, Next):
        return False, (f.arg,)
    if isinstance(f, Until):
        accepted, conts = _closure(store, f.goal)
        if accepted:
            return True, ()
        if eval_prop(f.hold, store):
            conts = conts + (f,)
        return False, conts
    raise TypeError(f"not a temporal formula: {f!r}")


def _path(parents: dict, key, initial: Store) -> Trace:
    steps = []
    while True:
        parent, label = parents[key]
        if parent is None:
            break
        steps.append((label, key[0].store))
        key = parent
    steps.reverse()
    return Trace(initial, steps)


def check(
    prog: Program,
    tf,
    limits: Limits = Limits(),
    workers: int = 1,
    store: Store | None = None,
):
    """Model-check ``tf`` from ``<main | store>``; returns ``(Verdict, ExplorationStats)``."""
    engine = Engine.of(prog)
    tf = as_temporal(tf)
    t0 = time.perf_counter()
    stats = ExplorationStats()
    cap = limits.states_cap()
    init = engine.initial(store)
    init_store = init.store

    parents: dict = {}
    conts_of: dict = {}

    def finish(verdict):
        stats.wall_ms = (time.perf_counter() - t0) * 1000
        stats.states_discovered = len(parents)
        return verdict, stats

    root = (init, tf)
    parents[root] = (None, None)
    accepted, conts = _closure(init.store, tf)
    if accepted:
        return finish(Verdict(HOLDS, Trace(init_store)))
    level = [root] if conts else []
    conts_of[root] = conts
    depth = 0
    truncated = False
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while level:
            stats.max_frontier = max(stats.max_frontier, len(level))
            if limits.max_depth is not None and depth >= limits.max_depth:
                truncated = True
                break
            nxt = []
            try:
                expanded = _expand_level(engine, level, pool)
                for key, succs in expanded:
                    stats.states_expanded += 1
                    for cfg, label in succs:
                        for k in conts_of[key]:
                            child = (cfg, k)
                            if child in parents:
                                continue
                            parents[child] = (key, label)
                            stats.edges += 1
                            ok, cs = _closure(cfg.store, k)
                            if ok:
                                return finish(Verdict(HOLDS, _path(parents, child, init_store)))
                            if len(parents) >= cap:
                                stats.bound = "max-states"
                                return finish(Verdict(UNKNOWN, _path(parents, child, init_store),
                                                      f"state limit {cap} reached"))
                            if cs:
                                conts_of[child] = cs
                                nxt.append(child)
            except _ExpansionError as e:
                stats.bound = "error"
                prefix = _path(parents, e.key, init_store)
                return finish(Verdict(UNKNOWN, prefix, f"{type(e.error).__name__}: {e.error}"))
            level = nxt
            depth += 1
    finally:
        if pool is not None:
            pool.shutdown()
    if truncated:
        stats.bound = "max-depth"
        return finish(Verdict(UNKNOWN, None, f"depth limit {limits.max_depth} reached"))
    return finish(Verdict(REFUTED))


class _ExpansionError(Exception):
    def __init__(self, key, error):
        self.key = key
        self.error = error


def _successors_or_fail(engine, key):
    try:
        return key, engine.successors(key[0])
    except GBachError as e:
        raise _ExpansionError(key, e)


def _expand_level(engine, level, pool):
    """Yield (key, successors) in level order, computing ahead in ``pool`` if given."""
    if pool is None:
        for key in level:
            yield _successors_or_fail(engine, key)
        return
    chunk = 256
    for i in range(0, len(level), chunk):
        yield from pool.map(lambda k: _successors_or_fail(engine, k), level[i:i + chunk])


# ---------------------------------------------------------------------------
# replay


def find_divergence(trace: Trace, prog: Program) -> Optional[int]:
    """Index (1-based step) of the first step that cannot be replayed, else None."""
    engine = Engine.of(prog)
    current = {engine.initial(trace.initial)}
    for i, (label, snap) in enumerate(trace.steps, 1):
        nxt = set()
        for cfg in current:
            try:
                succs = engine.successors(cfg)
            except GBachError:
                continue
            for c2, l2 in succs:
                if l2 == label and c2.store == snap:
                    nxt.add(c2)
        if not nxt:
            return i
        current = nxt
    return None


def replay(trace: Trace, prog: Program, strict: bool = False) -> bool:
    """True iff every step of ``trace`` is a legal transition with matching store.

    With ``strict`` a mismatch raises :class:`ReplayDivergence` instead.
    """
    i = find_divergence(trace, prog)
    if i is None:
        return True
    if strict:
        raise ReplayDivergence(i, "no successor matches the recorded label and store")
    return False


# ---------------------------------------------------------------------------
# full enumeration


@dataclass
class StateGraph:
    states: list = field(default_factory=list)  # Config by id
    edges: list = field(default_factory=list)  # (src, dst, TransitionLabel)

    def export(self) -> str:
        lines = [f"STATE {i} {canonical_encode(c.store).decode()}" for i, c in enumerate(self.states)]
        for src, dst, label in self.edges:
            prims = " ".join(map(str, label.fired))
            lines.append(f"EDGE {src} {dst} {label.rule} {prims}")
        return "\n".join(lines) + "\n"


def enumerate_space(prog: Program, limits: Limits = Limits(), store: Store | None = None):
    """Enumerate every reachable configuration; returns ``(stats, StateGraph)``."""
    engine = Engine.of(prog)
    t0 = time.perf_counter()
    stats = ExplorationStats()
    cap = limits.states_cap()
    init = engine.initial(store)
    ids = {init: 0}
    graph = StateGraph([init])
    queue = deque([(init, 0)])
    seen_edges = set()
    while queue:
        stats.max_frontier = max(stats.max_frontier, len(queue))
        cfg, depth = queue.popleft()
        if limits.max_depth is not None and depth >= limits.max_depth:
            stats.bound = "max-depth"
            continue
        try:
            succs = engine.successors(cfg)
        except GBachError as e:
            log.warning("expansion failed: %s", e)
            stats.bound = "error"
            continue
        stats.states_expanded += 1
        src = ids[cfg]
        for c2, label in succs:
            dst = ids.get(c2)
            if dst is None:
                if len(ids) >= cap:
                    stats.bound = "max-states"
                    continue
                dst = ids[c2] = len(graph.states)
                graph.states.append(c2)
                queue.append((c2, depth + 1))
            edge = (src, dst, label)
            if edge not in seen_edges:
                seen_edges.add(edge)
                graph.edges.append(edge)
    stats.states_discovered = len(graph.states)
    stats.edges = len(graph.edges)
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return stats, graph


def final_observables(prog: Program, store: Store | None = None, limits: Limits = Limits()) -> set:
    """The set of (final store, '+' | '-') pairs of every finite computation."""
    stats, graph = enumerate_space(prog, limits, store)
    if stats.bound != "complete":
        raise GBachError(f"state space not fully enumerated ({stats.bound})")
    out = set()
    has_succ = {src for src, _, _ in graph.edges}
    for i, cfg in enumerate(graph.states):
        if i not in has_succ:
            out.add((cfg.store, "+" if cfg.terminated else "-"))
    return out


def simulate(prog: Program, seed: int = 0, max_steps: int = 1000, store: Store | None = None):
    """One random execution; returns ``(Trace, final Config)``."""
    import random

    rng = random.Random(seed)
    engine = Engine.of(prog)
    cfg = engine.initial(store)
    trace = Trace(cfg.store)
    for _ in range(max_steps):
        succs = engine.successors(cfg)
        if not succs:
            break
        cfg, label = rng.choice(succs)
        trace.steps.append((label, cfg.store))
    return trace, cfg
