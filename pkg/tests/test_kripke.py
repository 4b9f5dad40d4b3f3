import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tltl import formula as fm
from tltl import kripke as kr
from tltl import reduction as rd
from tltl import sampling as sm
from tltl import trace as tr
from tltl.errors import EnumerationOverflow
from tltl.evaluator import check_classical, check_classical_many
from tltl.suites import FLIP_FLOP

from conftest import lassos

number_gadget = rd.gadget(rd.FIRST_ORDER)
set_gadget = rd.gadget(rd.SECOND_ORDER_UNARY)


def word_member(K, t):
    """Subset simulation along a prefix long enough to force an infinite path."""
    steps = K.n * (len(t.prefix) + len(t.loop)) + 1
    succ = K.successors()
    alive = {K.root} if K.labels[K.root] == tr.at(t, 0) else set()
    for i in range(1, steps):
        alive = {v for w in alive for v in succ[w] if K.labels[v] == tr.at(t, i)}
    return bool(alive)


@st.composite
def kripkes(draw):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return sm.random_kripke(rng, max_states=4)


class TestValidate:
    def test_self_loop(self):
        assert kr.validate(kr.kripke(["p"], [[]], [(0, 0)])) == []

    def test_not_serial(self):
        diags = kr.validate(kr.kripke(["p"], [[], ["p"]], [(0, 1)]))
        assert [(d.kind, d.state) for d in diags] == [("NotSerial", 1)]

    def test_gadgets(self):
        assert kr.validate(number_gadget) == []
        assert kr.validate(set_gadget) == []

    def test_bad_edge_and_root(self):
        K = kr.Kripke(("p",), (0,), frozenset({(0, 3)}), root=2)
        kinds = {d.kind for d in kr.validate(K)}
        assert {"BadRoot", "BadEdge", "NotSerial"} <= kinds

    def test_no_states(self):
        assert kr.validate(kr.Kripke((), (), frozenset()))[0].kind == "NoStates"

    def test_json_round_trip(self):
        doc = kr.kripke_to_json(FLIP_FLOP)
        assert kr.kripke_from_json(json.loads(json.dumps(doc))) == FLIP_FLOP


class TestMember:
    A = ("0", "1", "@end")

    def lasso(self, prefix, loop):
        return tr.trace_from_names(prefix, loop, self.A)

    def test_number_two(self):
        t = self.lasso([[], ["0"], ["0"], ["1"]], [["0", "@end"]])
        assert kr.trace_member(number_gadget, t)

    def test_stuck_trace(self):
        assert kr.trace_member(number_gadget, self.lasso([[]], [["0"]]))

    def test_wrong_root(self):
        assert not kr.trace_member(number_gadget, self.lasso([], [["0"]]))

    def test_missing_end(self):
        assert not kr.trace_member(number_gadget, self.lasso([[], ["1"]], [["0"]]))

    @given(kripkes(), st.integers(0, 10**6))
    def test_unrolled_paths_are_members(self, K, seed):
        rng = random.Random(seed)
        succ = K.successors()
        path = [K.root]
        for _ in range(rng.randint(0, 12)):
            path.append(rng.choice(succ[path[-1]]))
        # close the path into a cycle by walking until a state repeats
        seen = {}
        walk = list(path)
        while walk[-1] not in seen:
            seen[walk[-1]] = len(walk) - 1
            walk.append(rng.choice(succ[walk[-1]]))
        start = walk.index(walk[-1])
        labels = [K.labels[w] for w in walk[:-1]]
        t = tr.lasso(labels[:start], labels[start:])
        assert kr.trace_member(K, t)

    @given(kripkes(), lassos(max_prefix=4, max_loop=4))
    def test_agrees_with_subset_simulation(self, K, t):
        assert kr.trace_member(K, t) == word_member(K, t)


class TestEnumerate:
    def test_flip_flop_same_labels(self):
        K = kr.kripke(["0"], [["0"], ["0"]], [(0, 1), (1, 0)])
        assert kr.enumerate_ulp_traces(K, 3, 3) == {tr.trace_from_names([], [["0"]], ["0"])}

    def test_set_gadget(self):
        found = kr.enumerate_ulp_traces(set_gadget, 1, 1)
        A = ("0", "1")
        assert tr.trace_from_names([[]], [["0"]], A) in found
        assert tr.trace_from_names([[]], [["1"]], A) in found

    def test_single_empty_state(self):
        assert kr.enumerate_ulp_traces(kr.kripke(["p"], [[]], [(0, 0)]), 2, 2) == {tr.lasso([], [0])}

    def test_bounds(self):
        with pytest.raises(ValueError):
            kr.enumerate_ulp_traces(FLIP_FLOP, 1, 0)

    def test_cap(self):
        with pytest.raises(EnumerationOverflow):
            kr.enumerate_ulp_traces(set_gadget, 6, 6, cap=20)

    @given(kripkes())
    def test_complete_and_sound(self, K):
        found = kr.enumerate_ulp_traces(K, 2, 2)
        n = len(K.alphabet)
        for pre_len in range(3):
            for loop_len in range(1, 3):
                for code in range((1 << n) ** (pre_len + loop_len)):
                    labs = [(code >> (n * i)) & ((1 << n) - 1) for i in range(pre_len + loop_len)]
                    t = tr.lasso(labs[:pre_len], labs[pre_len:])
                    if len(t.prefix) <= 2 and len(t.loop) <= 2:
                        assert (t in found) == word_member(K, t), t


class TestChi:
    def test_one_state_structure(self):
        K = kr.kripke(["q"], [["q"]], [(0, 0)])
        _, chi = kr.chi_formula(K)
        P, N = fm.Prop, fm.Neg
        w = P("@pw_0")
        assert chi == fm.And(w, fm.Globally(fm.conj([w, P("q"), fm.Next(w)])))

    @pytest.mark.parametrize("K", [FLIP_FLOP, number_gadget, set_gadget], ids=["flip", "number", "set"])
    def test_members_satisfy(self, K):
        K2, chi = kr.chi_formula(K)
        traces = list(kr.enumerate_ulp_traces(K2, 3, 3))
        assert traces and all(check_classical_many(traces, chi, K2.alphabet))

    @given(kripkes(), st.lists(lassos(nprops=6, max_prefix=3, max_loop=3), max_size=20))
    def test_adequacy(self, K, ts):
        K2, chi = kr.chi_formula(K)
        mask = (1 << len(K2.alphabet)) - 1
        ts = [tr.lasso([a & mask for a in t.prefix], [a & mask for a in t.loop]) for t in ts]
        assert check_classical_many(ts, chi, K2.alphabet) == [kr.trace_member(K2, t) for t in ts]


class TestCountability:
    def test_set_gadget(self):
        assert kr.countability_class(set_gadget) == kr.UNCOUNTABLE

    def test_number_gadget(self):
        assert kr.countability_class(number_gadget) == kr.ALL_ULP

    def test_chain(self):
        K = kr.kripke(["p"], [[], ["p"], []], [(0, 1), (1, 2), (2, 2)])
        assert kr.countability_class(K) == kr.ALL_ULP

    def test_flip_flop(self):
        assert kr.countability_class(FLIP_FLOP) == kr.UNCOUNTABLE

    def test_unreachable_component_ignored(self):
        K = kr.kripke(["p"], [[], [], ["p"]], [(0, 0), (1, 2), (2, 1), (2, 2)])
        assert kr.countability_class(K) == kr.ALL_ULP

    @given(kripkes())
    def test_uncountable_means_branching_words(self, K):
        # uncountable structures have more label words than any lasso bound can explain
        words = kr._label_words(K, 13, 10**6)
        if kr.countability_class(K) == kr.ALL_ULP:
            assert len(words) <= 3 ** K.n * 14 ** (K.n - 1)
        else:
            assert len(words) >= 2 ** (13 // (2 * K.n))
