"""Benchmark harness comparing the guarded-list and plain Rush Hour programs."""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .board import validate_solution
from .checker import HOLDS, Limits, check, replay
from .logic import desugar_reach
from .rushhour import CASES, GOAL, generate_rush_hour, vehicle_count

log = logging.getLogger(__name__)

DEFAULT_CELLS = [(c, "GL") for c in range(1, 6)] + [(c, "NoGL") for c in range(1, 4)]


@dataclass
class BenchCell:
    case: int
    variant: str
    verdict: str
    wall_ms: float
    states_expanded: int
    states_discovered: int
    max_frontier: int
    witness_len: int
    replayed: Optional[bool] = None
    board_ok: Optional[bool] = None
    reason: str = ""

    def fields(self) -> dict:
        return {
            "verdict": self.verdict,
            "states_expanded": self.states_expanded,
            "states_discovered": self.states_discovered,
            "max_frontier": self.max_frontier,
            "wall_ms": round(self.wall_ms, 3),
            "witness_len": self.witness_len,
        }


@dataclass
class BenchReport:
    cells: list = field(default_factory=list)
    repeats: int = 1
    timings_reliable: bool = True

    def cell(self, case: int, variant: str) -> Optional[BenchCell]:
        for c in self.cells:
            if c.case == case and c.variant == variant:
                return c
        return None

    def cases(self) -> list:
        return sorted({c.case for c in self.cells})

    def ratios(self, case: int) -> Optional[dict]:
        """Speedup and state ratio of GL over NoGL; None unless both completed."""
        gl, no = self.cell(case, "GL"), self.cell(case, "NoGL")
        if gl is None or no is None or gl.verdict != HOLDS or no.verdict != HOLDS:
            return None
        return {
            "speedup": no.wall_ms / gl.wall_ms if gl.wall_ms > 0 else float("inf"),
            "state_ratio": no.states_expanded / max(gl.states_expanded, 1),
            "expected_gain": 2 ** vehicle_count(case),
        }

    def table(self) -> str:
        head = ["case", "variant", "verdict", "wall_ms", "expanded", "discovered", "witness", "board"]
        rows = []
        for c in sorted(self.cells, key=lambda c: (c.case, c.variant != "NoGL")):
            board = "-" if c.board_ok is None else ("ok" if c.board_ok else "FAIL")
            rows.append([str(c.case), c.variant, c.verdict, f"{c.wall_ms:.1f}", str(c.states_expanded),
                         str(c.states_discovered), str(c.witness_len), board])
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: "  ".join(v.rjust(w) for v, w in zip(r, widths)).rstrip()
        lines = [fmt(head)] + [fmt(r) for r in rows]
        gains = []
        for case in self.cases():
            r = self.ratios(case)
            if r is not None:
                gains.append(f"case {case}: speedup {r['speedup']:.2f}  state ratio {r['state_ratio']:.2f}"
                             f"  expected gain {r['expected_gain']}")
        if gains:
            lines += [""] + gains
        if not self.timings_reliable:
            lines += ["", "cases ran concurrently; timings are not reliable"]
        return "\n".join(lines) + "\n"

    def blocks(self) -> str:
        out = []
        for c in self.cells:
            out.append(f"[case {c.case} {c.variant}]")
            out += [f"{k}: {v}" for k, v in c.fields().items()]
            if c.reason:
                out.append(f"reason: {c.reason}")
            out.append("")
        return "\n".join(out)

    def text(self) -> str:
        return self.table() + "\n" + self.blocks()


def run_cell(case: int, variant: str, limits: Limits = Limits(), repeats: int = 3, workers: int = 1,
             export_dir: Optional[Path] = None) -> BenchCell:
    """Check Reach(#out = 1) ``repeats`` times on fresh programs; keep the median time."""
    times, verdict, stats = [], None, None
    for _ in range(max(repeats, 1)):
        prog = generate_rush_hour(case, variant)
        verdict, stats = check(prog, desugar_reach(GOAL), limits, workers=workers)
        times.append(stats.wall_ms)
    cell = BenchCell(
        case, variant, verdict.status, statistics.median(times), stats.states_expanded,
        stats.states_discovered, stats.max_frontier,
        len(verdict.trace) if verdict.status == HOLDS else -1, reason=verdict.reason,
    )
    if verdict.status == HOLDS:
        cell.replayed = replay(verdict.trace, prog)
        cell.board_ok = validate_solution(verdict.trace, case)
        if not cell.replayed:
            log.error("case %d %s: witness does not replay", case, variant)
        if export_dir is not None:
            export_dir.mkdir(parents=True, exist_ok=True)
            (export_dir / f"case{case}-{variant}.trace").write_text(verdict.trace.to_text())
    log.info("case %d %s: %s in %.1f ms", case, variant, cell.verdict, cell.wall_ms)
    return cell


def run_benchmark(cells=None, limits: Limits = Limits(), repeats: int = 3, workers: int = 1,
                  export_dir=None, parallel_cases: bool = False) -> BenchReport:
    """Run every ``(case, variant)`` of ``cells`` (default: GL 1-5, NoGL 1-3)."""
    cells = DEFAULT_CELLS if cells is None else list(cells)
    for case, variant in cells:
        if case not in CASES:
            raise ValueError(f"unknown case {case}")
    export_dir = Path(export_dir) if export_dir is not None else None
    report = BenchReport(repeats=repeats, timings_reliable=not parallel_cases)
    job = lambda cv: run_cell(cv[0], cv[1], limits, repeats, workers, export_dir)
    if parallel_cases and len(cells) > 1:
        with ThreadPoolExecutor() as pool:
            report.cells = list(pool.map(job, cells))
    else:
        report.cells = [job(cv) for cv in cells]
    return report


def cells_for(cases, variants=("GL", "NoGL")) -> list:
    return [(c, v) for c in cases for v in variants]
