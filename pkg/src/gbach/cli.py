"""Command-line interface: parse, check, run, transform, bench."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .checker import HOLDS, REFUTED, Limits, check, format_report, simulate
from .errors import GBachError, ProgramError
from .logic import as_temporal
from .parser import parse_formula, parse_prop, parse_program
from .syntax import format_program

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_UNKNOWN = 0, 1, 2, 3

log = logging.getLogger("gbach")


class _IOFailure(Exception):
    pass


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise _IOFailure(f"{path}: {e.strerror or e}")


def _load(path: str):
    return parse_program(_read(path), source=path)


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _limits(args) -> Limits:
    return Limits(max_states=args.max_states, max_depth=args.max_depth)


def _formula(prog, args):
    if args.formula in prog.formulas:
        return prog.formulas[args.formula]
    if args.formula is None:
        if len(prog.formulas) == 1:
            return next(iter(prog.formulas.values()))
        raise GBachError("no formula given and the program does not declare exactly one")
    return parse_formula(args.formula, prog)


def cmd_parse(args) -> int:
    try:
        prog = _load(args.path)
    except ProgramError as e:
        for d in e.diagnostics:
            print(d)
        print(f"{len(e.diagnostics)} errors")
        return EXIT_FAIL
    if args.print:
        sys.stdout.write(format_program(prog))
    print("0 errors")
    return EXIT_OK


def cmd_check(args) -> int:
    prog = _load(args.path)
    tf = as_temporal(_formula(prog, args))
    verdict, stats = check(prog, tf, _limits(args), workers=args.workers)
    sys.stdout.write(format_report(verdict, stats))
    if verdict.trace is not None and args.witness:
        Path(args.witness).write_text(verdict.trace.to_text())
    if args.show_trace and verdict.trace is not None:
        sys.stdout.write(verdict.trace.to_text())
    if verdict.status == HOLDS:
        return EXIT_OK
    return EXIT_FAIL if verdict.status == REFUTED else EXIT_UNKNOWN


def cmd_run(args) -> int:
    prog = _load(args.path)
    trace, final = simulate(prog, seed=args.seed, max_steps=args.max_steps)
    sys.stdout.write(trace.to_text())
    state = "terminated" if final.terminated else "stuck or bounded"
    print(f"# {len(trace)} steps, {state}, final store {final.store.text()}")
    return EXIT_OK


def cmd_transform(args) -> int:
    from .refinement import transform_to_guarded

    raw = _read(args.path)
    prog = parse_program(raw, source=args.path)
    pf = parse_prop(args.F, prog)
    out, report = transform_to_guarded(prog, pf, force=args.force)
    text = format_program(out) if report.changed else raw.decode("utf-8")
    if args.report:
        Path(args.report).write_text(report.text())
    if args.dry_run:
        sys.stdout.write(report.text())
        return EXIT_OK
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if not args.report:
        sys.stderr.write(report.text())
    return EXIT_OK


def _cells(args):
    from .bench import DEFAULT_CELLS, cells_for

    if args.cases is None:
        return DEFAULT_CELLS
    cases = [int(c) for c in args.cases.split(",") if c.strip()]
    return cells_for(cases, tuple(args.variants.split(",")))


def cmd_bench(args) -> int:
    from .bench import run_benchmark

    report = run_benchmark(
        _cells(args),
        _limits(args),
        repeats=args.repeats,
        workers=args.workers,
        export_dir=args.export_traces,
        parallel_cases=args.parallel_cases,
    )
    text = report.text()
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    bad = [c for c in report.cells if c.verdict == REFUTED or c.replayed is False or c.board_ok is False]
    return EXIT_FAIL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbach", description="Coordination programs: parse, model-check, transform.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def limits(p):
        p.add_argument("--max-states", type=_positive, help="state limit (default 10^7 or $GBACH_MAX_STATES)")
        p.add_argument("--max-depth", type=_positive)
        p.add_argument("--workers", type=_positive, default=1, help="threads for frontier expansion")

    p = sub.add_parser("parse", help="parse and statically check a program")
    p.add_argument("path")
    p.add_argument("--print", action="store_true", help="pretty-print the program")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="model-check a formula")
    p.add_argument("path")
    p.add_argument("-f", "--formula", help="declared formula name or inline formula")
    p.add_argument("--witness", help="write the witness trace to this file")
    p.add_argument("--show-trace", action="store_true")
    limits(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="one random execution, printed as a trace")
    p.add_argument("path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=_positive, default=1000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("transform", help="introduce guarded lists")
    p.add_argument("path")
    p.add_argument("-F", required=True, help="propositional formula whose reachability must be kept")
    p.add_argument("--force", action="store_true", help="also wrap chains failing the distinctness test")
    p.add_argument("--dry-run", action="store_true", help="print the site report only")
    p.add_argument("-o", "--output")
    p.add_argument("--report", help="write the site report to this file")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("bench", help="Rush Hour benchmark")
    p.add_argument("--cases", help="comma-separated case numbers (default: GL 1-5 and NoGL 1-3)")
    p.add_argument("--variants", default="GL,NoGL")
    p.add_argument("--repeats", type=_positive, default=3)
    p.add_argument("--export-traces", metavar="DIR")
    p.add_argument("--parallel-cases", action="store_true")
    p.add_argument("-o", "--output")
    limits(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _IOFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ProgramError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        if not e.diagnostics:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except GBachError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
