"""Acceptance gate.

One test per criterion; conftest prints a PASS/FAIL line for each at the end
of the session.  Run alone with ``pytest tests/test_acceptance.py``.
"""

import random
import time

from gbach.board import validate_solution
from gbach.checker import HOLDS, REFUTED, Limits, check, enumerate_space, final_observables, format_report, simulate
from gbach.logic import desugar_reach, eval_prop
from gbach.parser import parse_agent, parse_program, parse_prop
from gbach.refinement import check_F_preserving, check_refinement, syntactic_guardable, transform_to_guarded
from gbach.rushhour import CASES, GOAL, generate_rush_hour
from gbach.bench import run_cell
from gbach.semantics import Engine, normal_form
from gbach.syntax import GuardedList, Par, seq, subst_agent
from gbach.terms import Atom, Compound, Store, Token
from oracles import TOKENS, iddfs_shortest, random_agent, random_store
from test_refinement import SNIPPET, random_chain, random_program

REACH = desugar_reach(GOAL)
RULE_PROG = parse_program("gprim move. proc P() = tell(a). run E.")

# (rule, agent, store): exactly one transition exists and its derivation uses the rule
FORCED = [
    ("T", "tell(a)", {}),
    ("A", "ask(a)", {"a": 1}),
    ("G", "get(a)", {"a": 1}),
    ("N", "nask(a)", {}),
    ("Gr", "move(a, 1)", {}),
    ("S", "tell(a); tell(b)", {}),
    ("P", "tell(a) || ask(b)", {}),
    ("C", "tell(a) + ask(b)", {}),
    ("Co", "1 = 2 -> ask(b) <> tell(a)", {}),
    ("Pc", "P()", {}),
    ("Le", "[tell(a)]", {}),
    ("Ln", "[get(a) -> tell(b)]", {"a": 1}),
    ("GL", "[nask(b) -> tell(b), move(b, 1)]", {}),
]


def _forced(rule, src, counts):
    engine = Engine.of(RULE_PROG)
    cfg = engine.config(parse_agent(src, RULE_PROG), Store({Token(k): n for k, n in counts.items()}))
    succs = engine.successors(cfg)
    return len(succs) == 1 and rule in succs[0][1].derivation


def test_criterion_1_rule_coverage():
    start = time.perf_counter()
    missing = [rule for rule, src, counts in FORCED if not _forced(rule, src, counts)]
    # blocked counterparts: the same primitive in a store that disables it
    blocked = [("ask(a)", {}), ("get(a)", {}), ("nask(a)", {"a": 1}), ("[get(a) -> tell(b)]", {})]
    engine = Engine.of(RULE_PROG)
    for src, counts in blocked:
        cfg = engine.config(parse_agent(src, RULE_PROG), Store({Token(k): n for k, n in counts.items()}))
        assert engine.successors(cfg) == [], src
    assert not missing
    assert {r for r, _, _ in FORCED} == {"T", "A", "G", "N", "Gr", "S", "P", "C", "Co", "Pc", "Le", "Ln", "GL"}
    assert time.perf_counter() - start < 1.0


def test_criterion_2_rush_hour_solvable():
    for case in (1, 2, 3):
        for variant in ("GL", "NoGL"):
            verdict, stats = check(generate_rush_hour(case, variant), REACH, Limits(max_states=10**7))
            assert verdict.status == HOLDS, (case, variant, verdict.reason)
            assert validate_solution(verdict.trace, case, strict=True)


def test_criterion_3_guarded_list_gain():
    for case in (1, 2, 3, 4):
        gl, no = run_cell(case, "GL", repeats=5), run_cell(case, "NoGL", repeats=5)
        assert gl.verdict == no.verdict == HOLDS
        assert gl.states_expanded < no.states_expanded, case
        if case in (2, 3):
            assert no.wall_ms / gl.wall_ms >= 2.0, (case, gl.wall_ms, no.wall_ms)


def test_criterion_4_normal_form_preserves_final_stores():
    start = time.perf_counter()
    rng = random.Random(20240501)
    base = parse_program("")
    for _ in range(120):
        agent = random_agent(rng, max_prims=6)
        nf = normal_form(agent)
        for store in (Store(), random_store(rng)):
            assert final_observables(base.with_main(nf), store) == final_observables(base.with_main(agent), store)
    assert time.perf_counter() - start < 30


def test_criterion_5_guarded_list_refinement():
    rng = random.Random(11)
    empty = parse_program("gprim move.")
    for _ in range(110):
        guard, tail = random_chain(rng)
        assert syntactic_guardable([guard, *tail])
        stores = [random_store(rng) for _ in range(2)]
        assert check_refinement(GuardedList(guard, tail), seq(guard, *tail) if tail else guard, stores, empty, 8)
    changed = 0
    for _ in range(60):
        prog = random_program(rng)
        target = rng.choice(TOKENS + [Token("out")])
        pf = parse_prop(f"#{target.name} = {rng.randint(0, 2)}")
        out, report = transform_to_guarded(prog, pf)
        changed += report.changed
        for store in (Store(), random_store(rng)):
            assert check(prog, desugar_reach(pf), store=store)[0].status == \
                check(out, desugar_reach(pf), store=store)[0].status
    assert changed >= 20


def test_criterion_6_snippet_contraction():
    prog = parse_program(SNIPPET)
    plain = subst_agent(prog.procs["Snippet"].body, {"r": Atom(3), "c": Atom(3)})
    guarded, _ = transform_to_guarded(prog.with_main(plain), GOAL)
    assert isinstance(guarded.main, GuardedList)
    start = [Store({Compound("free", (Atom(2), Atom(3))): 1})]
    for text in ("#out = 1", "#free(2, 3) = 1"):
        assert check_F_preserving(guarded.main, plain, start, prog, parse_prop(text), 8), text


def _corpus():
    for case in sorted(CASES):
        for variant in ("GL", "NoGL"):
            prog = generate_rush_hour(case, variant)
            stats, _ = enumerate_space(prog, Limits(max_states=10**4))
            if stats.bound == "complete":
                yield f"case{case}-{variant}", prog, GOAL, None
    rng = random.Random(3)
    empty = parse_program("")
    for i in range(60):
        prog = empty.with_main(Par(random_agent(rng), random_agent(rng, max_prims=3)))
        pf = parse_prop(f"#{rng.choice('abc')} = {rng.randint(1, 2)}")
        yield f"random{i}", prog, pf, random_store(rng)


def test_criterion_7_bfs_minimality():
    checked = 0
    for name, prog, pf, store in _corpus():
        verdict, _ = check(prog, desugar_reach(pf), store=store)
        oracle = iddfs_shortest(prog, lambda s: eval_prop(pf, s), store=store)
        if verdict.status == HOLDS:
            assert len(verdict.trace) == oracle, name
            checked += 1
        else:
            assert verdict.status == REFUTED and oracle is None, name
    assert checked >= 40


def test_criterion_8_determinism():
    def output(prog, workers=1):
        verdict, stats = check(prog, REACH, workers=workers)
        report = "\n".join(l for l in format_report(verdict, stats).splitlines() if not l.startswith("wall_ms"))
        return verdict, report + "\n" + verdict.trace.to_text()

    for case, variant in ((2, "GL"), (3, "NoGL")):
        v1, first = output(generate_rush_hour(case, variant))
        v2, second = output(generate_rush_hour(case, variant))
        assert first.encode() == second.encode()
        par, _ = output(generate_rush_hour(case, variant), workers=4)
        assert par.status == v1.status and len(par.trace) == len(v1.trace)
    prog = generate_rush_hour(2, "NoGL")
    runs = [simulate(prog, seed=17, max_steps=200)[0].to_text() for _ in range(2)]
    assert runs[0] == runs[1]
