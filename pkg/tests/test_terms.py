import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbach.errors import RewriteBudgetExceeded, UndefinedMapApplication
from gbach.parser import parse_program, parse_term
from gbach.terms import (
    Atom,
    Compound,
    Definitions,
    MapApp,
    MapDef,
    SetDef,
    Store,
    Token,
    canonical_encode,
    is_final,
    rewrite,
    store_add,
    store_count,
    store_remove,
)
from oracles import ListStore, all_normal_forms

A, B = Token("a"), Token("b")


def free(r, c):
    return Compound("free", (Atom(r), Atom(c)))


@pytest.fixture(scope="module")
def arith():
    sets = [SetDef("RCInt", tuple(Atom(i) for i in range(1, 7)))]
    maps = [
        MapDef("pred", ("RCInt",), "RCInt", [((Atom(i),), Atom(i - 1)) for i in range(2, 7)]),
        MapDef("succ", ("RCInt",), "RCInt", [((Atom(i),), Atom(i + 1)) for i in range(1, 6)]),
        MapDef("down_truck", ("RCInt",), "RCInt", [((Atom(i),), Atom(i + 3)) for i in range(1, 4)]),
    ]
    return Definitions(sets, maps)


class TestRewrite:
    def test_down_truck(self, arith):
        assert rewrite(MapApp("down_truck", (Atom(1),)), arith) == Atom(4)

    def test_final_term_unchanged(self, arith):
        assert rewrite(free(1, 1), arith) == free(1, 1)

    def test_nested_innermost(self, arith):
        t = Compound("free", (MapApp("pred", (Atom(3),)), MapApp("succ", (Atom(2),))))
        assert rewrite(t, arith) == free(2, 3)

    def test_agrees_with_every_redex_order(self, arith):
        eqs = {m.name: m.equations for m in arith.maps.values()}
        t = Compound("free", (MapApp("pred", (MapApp("succ", (Atom(3),)),)), MapApp("succ", (Atom(2),))))
        normal = all_normal_forms(t, eqs)
        assert normal == {rewrite(t, arith)} == {free(3, 3)}

    def test_partial_map_is_an_error(self, arith):
        with pytest.raises(UndefinedMapApplication):
            rewrite(MapApp("pred", (Atom(1),)), arith)

    def test_unknown_map(self, arith):
        with pytest.raises(UndefinedMapApplication):
            rewrite(MapApp("nope", (Atom(1),)), arith)

    def test_budget(self):
        # f(1) = f(1) loops forever
        loop = Definitions([], [MapDef("f", ("S",), "S", [((Atom(1),), MapApp("f", (Atom(1),)))])])
        with pytest.raises(RewriteBudgetExceeded):
            rewrite(MapApp("f", (Atom(1),)), loop)

    def test_budget_is_configurable(self, arith):
        t = MapApp("succ", (MapApp("succ", (Atom(1),)),))
        with pytest.raises(RewriteBudgetExceeded):
            rewrite(t, Definitions(arith.sets.values(), arith.maps.values(), budget=1))
        assert rewrite(t, arith, budget=2) == Atom(3)

    def test_first_equation_wins(self):
        d = Definitions([], [MapDef("f", ("S",), "S", [((A,), Atom(1)), ((A,), Atom(2))])])
        assert rewrite(MapApp("f", (A,)), d) == Atom(1)

    @given(st.integers(1, 6), st.integers(1, 6), st.lists(st.sampled_from(["pred", "succ"]), max_size=4))
    def test_idempotent(self, arith, r, c, chain):
        t = Atom(r)
        for name in chain:
            t = MapApp(name, (t,))
        term = Compound("free", (t, Atom(c)))
        try:
            out = rewrite(term, arith)
        except UndefinedMapApplication:
            return
        assert is_final(out)
        assert rewrite(out, arith) == out
        assert all_normal_forms(term, {m.name: m.equations for m in arith.maps.values()}) == {out}

    def test_from_source(self):
        prog = parse_program("eset S = {1, 2}. map f : S # S -> S. eqn f(1, 2) = 2. f(2, 1) = 1.")
        assert rewrite(parse_term("g(f(1, 2), f(2, 1))", prog), prog.defs) == Compound("g", (Atom(2), Atom(1)))


class TestStore:
    def test_add(self):
        assert store_add(Store(), A) == Store({A: 1})
        assert store_add(Store({A: 1}), A) == Store({A: 2})

    def test_add_oracle(self):
        out = Token("out")
        s = store_add(Store({free(2, 3): 1, out: 1}), free(2, 3))
        oracle = ListStore([free(2, 3), out]).add(free(2, 3))
        assert s == Store(oracle.as_dict()) == Store({free(2, 3): 2, out: 1})

    def test_remove(self):
        assert store_remove(Store({A: 2}), A) == Store({A: 1})
        assert store_remove(Store({B: 1}), A) is None
        assert store_remove(Store({A: 1}), A) == Store()

    def test_count(self):
        assert store_count(Store(), A) == 0
        assert store_count(Store({free(1, 1): 1}), free(1, 1)) == 1
        oracle = ListStore([A, A, A, B])
        assert store_count(Store(oracle.as_dict()), A) == oracle.count(A) == 3

    def test_immutable(self):
        s = Store({A: 1})
        s.add(B)
        s.remove(A)
        assert s == Store({A: 1})

    def test_text(self):
        assert Store({B: 1, A: 2}).text() == "{a:2, b:1}"


terms = st.recursive(
    st.one_of(st.integers(-3, 9).map(Atom), st.sampled_from("abcxy").map(Token)),
    lambda inner: st.builds(lambda f, args: Compound(f, tuple(args)), st.sampled_from("fg"), st.lists(inner, min_size=1, max_size=3)),
    max_leaves=6,
)
stores = st.dictionaries(terms, st.integers(1, 3), max_size=6).map(Store)


class TestStoreProperties:
    @given(stores, terms)
    def test_add_increments(self, s, t):
        assert s.add(t).count(t) == s.count(t) + 1
        assert all(s.add(t).count(u) == s.count(u) for u in s.terms() if u != t)

    @given(stores, terms)
    def test_remove_inverts_add(self, s, t):
        assert s.add(t).remove(t) == s

    @given(stores, terms)
    def test_matches_list_oracle(self, s, t):
        oracle = ListStore(list(s.terms()))
        got = s.remove(t)
        want = oracle.remove(t)
        assert (got is None) == (want is None)
        if got is not None:
            assert got == Store(want.as_dict())


class TestCanonicalEncode:
    def test_empty(self):
        assert canonical_encode(Store()) == b""

    def test_order_independent(self):
        assert canonical_encode(Store({A: 1, B: 2})) == canonical_encode(Store({B: 2, A: 1}))

    def test_random_insert_orders(self):
        rng = random.Random(7)
        items = [free(rng.randint(1, 6), rng.randint(1, 6)) for _ in range(14)] + [A, B, A, Atom(3), Atom(-1), Token("out")]
        assert len(items) == 20
        encodings = set()
        for _ in range(1000):
            rng.shuffle(items)
            s = Store()
            for t in items:
                s = s.add(t)
            encodings.add(canonical_encode(s))
        assert len(encodings) == 1

    def test_injective_on_corpus(self):
        rng = random.Random(11)
        pool = [A, B, Token("c"), Atom(1), Atom(12), Atom(2), free(1, 2), free(12, 1), Compound("f", (A,)), Compound("f", (A, B))]
        seen = {}
        for _ in range(10_000):
            s = Store({t: n for t in pool if (n := rng.choice([0, 0, 1, 2, 11]))})
            enc = canonical_encode(s)
            if enc in seen:
                assert seen[enc] == s
            seen[enc] = s
        assert len(set(seen.values())) == len(seen)

    @settings(max_examples=200)
    @given(stores, stores)
    def test_injective_property(self, s1, s2):
        assert (canonical_encode(s1) == canonical_encode(s2)) == (s1 == s2)
