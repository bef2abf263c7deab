import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbach.checker import final_observables
from gbach.errors import GuardedTailFailure, TypeMismatch, UndefinedMapApplication, UnsupportedConstruct
from gbach.parser import parse_agent, parse_program
from gbach.semantics import (
    Config,
    Engine,
    eval_condition,
    is_normal_form,
    normal_form,
    simplify,
    step_primitive,
    successors,
)
from gbach.syntax import E, Choice, GuardedList, Par, Seq, ask, get, gprim, nask, tell
from gbach.terms import Atom, Compound, Store, Token

A, B, C, D = (Token(x) for x in "abcd")


def run_one(src_agent, store=Store(), prog_src=""):
    prog = parse_program(prog_src)
    engine = Engine.of(prog)
    cfg = engine.config(parse_agent(src_agent, prog), store)
    return engine.successors(cfg)


class TestPrimitives:
    def test_tell(self):
        store, label = step_primitive(tell(A), Store(), parse_program("").defs)
        assert store == Store({A: 1}) and label.rule == "T"

    def test_nask_blocks_when_present(self):
        assert step_primitive(nask(A), Store({A: 1}), parse_program("").defs) is None

    def test_get_rewrites_argument(self):
        prog = parse_program("eset S = {1, 2, 3}. map pred : S -> S. eqn pred(2) = 1. pred(3) = 2.")
        p = parse_agent("get(free(pred(3), 2))", prog)
        store, label = step_primitive(p, Store({Compound("free", (Atom(2), Atom(2))): 1}), prog.defs)
        assert store == Store() and label.rule == "G"
        assert str(label.fired[0]) == "get(free(2,2))"

    def test_undefined_map_propagates(self):
        prog = parse_program("eset S = {1, 2}. map pred : S -> S. eqn pred(2) = 1.")
        with pytest.raises(UndefinedMapApplication):
            step_primitive(parse_agent("tell(pred(1))", prog), Store(), prog.defs)

    @given(st.dictionaries(st.sampled_from([A, B, C]), st.integers(1, 3)).map(Store))
    def test_graphical_never_changes_store(self, store):
        out, label = step_primitive(gprim("move", A, Atom(1)), store, parse_program("").defs)
        assert out == store and label.rule == "Gr" and label.events


class TestConditions:
    defs = parse_program("eset S = {1, 2, 3, 4, 5, 6}. map down_truck : S -> S. eqn down_truck(1) = 4.").defs

    def cond(self, text):
        return parse_agent(f"{text} -> E", parse_program("eset S = {1, 2, 3, 4, 5, 6}. map down_truck : S -> S. eqn down_truck(1) = 4.")).cond

    def test_range_condition(self):
        assert eval_condition(self.cond("(3 > 1 & 3 < 5)"), self.defs)

    def test_negation(self):
        assert not eval_condition(self.cond("!(1 = 1)"), self.defs)

    def test_map_in_condition(self):
        assert eval_condition(self.cond("down_truck(1) = 4"), self.defs)

    def test_token_equality(self):
        assert eval_condition(self.cond("red != blue | false"), self.defs)

    def test_token_ordering_rejected(self):
        with pytest.raises(TypeMismatch):
            eval_condition(self.cond("red < blue"), self.defs)


class TestSuccessors:
    def test_interleaving(self):
        got = {(c.agent, c.store) for c, _ in run_one("tell(a) || tell(b)")}
        assert got == {(tell(B), Store({A: 1})), (tell(A), Store({B: 1}))}

    def test_guarded_list_single_step(self):
        succs = run_one("[get(a) -> tell(b), tell(c)]", Store({A: 1}))
        assert len(succs) == 1
        cfg, label = succs[0]
        assert cfg.agent is E and cfg.store == Store({B: 1, C: 1})
        assert label.rule == "GL" and [f.name for f in label.fired] == ["get", "tell", "tell"]

    def test_guard_blocked(self):
        assert run_one("[get(a) -> tell(b)]") == []

    def test_blocked_choice_branch(self):
        succs = run_one("ask(a); tell(b) + tell(c)")
        assert [(c.agent, c.store) for c, _ in succs] == [(E, Store({C: 1}))]

    def test_tail_failure_is_loud(self):
        with pytest.raises(GuardedTailFailure) as info:
            run_one("[tell(a) -> get(b)]")
        assert info.value.index == 0

    def test_cond_without_else_blocks(self):
        assert run_one("1 = 2 -> tell(a)") == []

    def test_choice_both_blocked_is_deadlock(self):
        assert run_one("ask(a) + get(b)") == []

    def test_procedure_unfolding(self, truck):
        engine = Engine.of(truck)
        start = engine.initial()
        (cfg, _), = engine.successors(start)
        labels = sorted(str(l) for _, l in engine.successors(cfg))
        assert labels == ["G get(free(1,4))"]

    def test_successor_set_is_deterministic(self, truck):
        engine = Engine.of(truck)
        seen = [engine.initial()]
        for cfg in seen[:20]:
            first = engine.successors(cfg)
            again = Engine(truck).successors(cfg)
            assert first == again
            seen.extend(c for c, _ in first)

    def test_module_level_helper(self):
        prog = parse_program("run tell(a).")
        (cfg, label), = successors(Engine.of(prog).initial(), prog)
        assert cfg == Config(E, Store({A: 1}))


class TestGuardedListProperties:
    @settings(max_examples=200)
    @given(st.integers(0, 2**31))
    def test_collapse(self, seed):
        rng = random.Random(seed)
        defs = parse_program("").defs
        store = Store({t: n for t in (A, B, C) if (n := rng.randint(0, 2))})
        guard = rng.choice([tell, ask, nask, get])(rng.choice([A, B, C]))
        tail = tuple(rng.choice([tell(rng.choice([A, B, C])), gprim("move", Atom(rng.randint(1, 6)))]) for _ in range(rng.randint(0, 3)))
        gl = run_one_agent(GuardedList(guard, tail), store)
        first = step_primitive(guard, store, defs)
        assert (len(gl) == 1) == (first is not None)
        if first is not None:
            s = first[0]
            for p in tail:
                s = step_primitive(p, s, defs)[0]
            assert gl[0][0].store == s

    @settings(max_examples=200)
    @given(st.sampled_from([tell, ask, nask, get]), st.sampled_from([A, B]),
           st.dictionaries(st.sampled_from([A, B]), st.integers(1, 2)).map(Store))
    def test_singleton_equivalence(self, kind, t, store):
        plain = [(c.store, c.terminated) for c, _ in run_one_agent(kind(t), store)]
        wrapped = [(c.store, c.terminated) for c, _ in run_one_agent(GuardedList(kind(t), ()), store)]
        assert plain == wrapped


def run_one_agent(agent, store):
    prog = parse_program("")
    engine = Engine.of(prog)
    return engine.successors(engine.config(agent, store))


class TestSimplify:
    def test_seq(self):
        assert simplify(Seq(E, tell(A))) == tell(A)

    def test_par_of_terminated(self):
        assert simplify(Par(E, E)) is E

    def test_bottom_up(self):
        assert simplify(Par(Seq(E, tell(A)), E)) == tell(A)

    def test_untouched(self):
        a = Choice(tell(A), Par(tell(B), tell(C)))
        assert simplify(a) is a


class TestNormalForm:
    def test_primitive(self):
        assert normal_form(tell(A)) == tell(A)

    def test_parallel(self):
        assert normal_form(Par(tell(A), tell(B))) == Choice(Seq(tell(A), tell(B)), Seq(tell(B), tell(A)))

    def test_leftmerge(self):
        p, q, r = tell(A), tell(B), tell(C)
        assert normal_form(Par(Seq(p, q), r)) == Choice(Seq(p, Par(q, r)), Seq(r, Seq(p, q)))

    def test_rejects_calls(self):
        with pytest.raises(UnsupportedConstruct):
            normal_form(parse_agent("1 = 1 -> tell(a)"))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31))
    def test_shape_and_final_stores(self, seed):
        from oracles import random_agent

        a = random_agent(random.Random(seed))
        n = normal_form(a)
        assert is_normal_form(n)
        base = parse_program("")
        assert final_observables(base.with_main(n)) == final_observables(base.with_main(a))
