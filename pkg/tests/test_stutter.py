import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tltl import sampling as sm
from tltl import stutter as stt
from tltl.errors import MisalignedSpec
from tltl.evaluator import check
from tltl.suites import STRETCH_ALPHABET, stretched_pair
from tltl.team import Team, snapshot, team_from_names
from tltl import trace as tr

from conftest import ALPHABET, formulas, teams

Spec = stt.StutterSpec


def single(alphabet, prefix, loop):
    return team_from_names(alphabet, [(prefix, loop)])


def shifted_p_team():
    return team_from_names(["p"], [([[]] * n + [["p"]], [[]]) for n in range(3)])


class TestStutteringFunction:
    @given(teams())
    def test_identity(self, T):
        assert stt.is_stuttering_function(stt.identity_spec(), T)

    def test_block_functions(self):
        T, S = stretched_pair()
        f, g = Spec((1, 2, 1), (1,)), Spec((2, 2, 2), (1,))
        assert stt.is_stuttering_function(f, T)
        assert stt.is_stuttering_function(g, S)
        assert stt.contract(T, f) == stt.contract(S, g)

    def test_block_function_rejected_on_wrong_team(self):
        T, _ = stretched_pair()
        assert not stt.is_stuttering_function(Spec((2, 2, 2), (1,)), T)

    def test_only_identity_near_the_start(self):
        T = shifted_p_team()
        for n in range(5):
            for pre in itertools.product(range(1, 4), repeat=n):
                for loop in [(1,), (2,), (1, 2)]:
                    spec = Spec(pre, loop)
                    skips_early = any(j not in spec.starts(4) for j in range(4))
                    if skips_early:
                        assert not stt.is_stuttering_function(spec, T), spec

    def test_bad_multiplicity(self):
        with pytest.raises(ValueError):
            Spec((0,), (1,))
        with pytest.raises(ValueError):
            Spec((1,), ())


class TestCanonical:
    def test_single_trace(self):
        abc = ["p", "q", "z"]
        T = single(abc, [["p"], ["p"], ["q"]], [["z"]])
        assert stt.canonical_stutter_free(T) == single(abc, [["p"], ["q"]], [["z"]])

    def test_constant_suffix(self):
        T = single(["p"], [["p"]], [["p"]])
        assert stt.canonical_stutter_free(T) == single(["p"], [], [["p"]])
        assert stt.stuttering_positions(T) == []

    def test_stretched_pair_canonical_team(self):
        T, S = stretched_pair()
        expected = team_from_names(STRETCH_ALPHABET, [([["b"], ["a"], ["b"]], [["a"]]),
                                                   ([["a"], ["a"], ["a"]], [["b"]])])
        assert stt.canonical_stutter_free(T) == expected
        assert stt.canonical_stutter_free(S) == expected
        assert len(snapshot(expected)) == 4

    def test_loop_rotation(self):
        T = single(["p"], [], [["p"], ["p"], []])
        c = stt.canonical_stutter_free(T)
        assert stt.is_stutter_free(c)
        assert stt.stutter_equivalent(c, T)
        assert len(snapshot(c)) == 2

    @given(teams())
    def test_idempotent_and_stutter_free(self, T):
        c = stt.canonical_stutter_free(T)
        assert stt.canonical_stutter_free(c) == c
        assert stt.is_stutter_free(c)
        assert len(c) == len(T)

    @given(teams(min_traces=1), st.integers(0, 10**6))
    def test_uniqueness(self, T, seed):
        rng = random.Random(seed)
        e1 = stt.expand(T, stt.random_spec(rng, T))
        e2 = stt.expand(T, stt.random_spec(rng, T))
        assert stt.canonical_stutter_free(e1) == stt.canonical_stutter_free(e2)

    @given(teams(min_traces=1))
    def test_positions_by_trace_scan(self, T):
        H = len(snapshot(T))

        def constant_from(i):
            return all(tr.at(t, j) == tr.at(t, i) for t in T.traces for j in range(i, i + 2 * H + 2))

        expected = [i for i in range(H)
                    if all(tr.at(t, i) == tr.at(t, i + 1) for t in T.traces) and not constant_from(i)]
        assert stt.stuttering_positions(T) == expected


class TestEquivalence:
    def test_stretched_pair(self):
        assert stt.stutter_equivalent(*stretched_pair())

    def test_negative(self):
        abc = ["p", "q", "z"]
        assert not stt.stutter_equivalent(single(abc, [["p"]], [["z"]]),
                                          single(abc, [["p"], ["p"], ["q"]], [["z"]]))

    def test_different_cardinality(self):
        a = team_from_names(["p"], [([], [["p"]])])
        b = team_from_names(["p"], [([], [["p"]]), ([], [[]])])
        assert not stt.stutter_equivalent(a, b)

    @given(teams(), st.integers(0, 10**6))
    def test_expansion(self, T, seed):
        E = stt.expand(T, stt.random_spec(random.Random(seed), T))
        assert len(E) == len(T)
        assert stt.stutter_equivalent(T, E)


class TestExpand:
    def test_identity(self):
        T, _ = stretched_pair()
        spec = Spec((1,) * len(snapshot(T).prefix), (1,) * len(snapshot(T).loop))
        assert stt.expand(T, spec) == T

    def test_duplicate_first_column(self):
        T = single(["p", "q"], [["p"]], [["q"]])
        assert stt.expand(T, Spec((2,), (1,))) == single(["p", "q"], [["p"], ["p"]], [["q"]])

    def test_misaligned(self):
        T = single(["p", "q"], [["p"]], [["q"]])
        with pytest.raises(MisalignedSpec):
            stt.expand(T, Spec((1, 1), (1,)))

    @given(teams(), st.integers(0, 10**6))
    def test_contract_inverts_expand(self, T, seed):
        spec = stt.random_spec(random.Random(seed), T)
        E = stt.expand(T, spec)
        assert stt.is_stuttering_function(spec, E)
        assert stt.contract(E, spec) == T


def covers(n):
    for a in range(1 << n):
        for b in range(1 << n):
            if a | b == (1 << n) - 1:
                yield a, b


@given(teams(max_traces=4, max_prefix=2, max_loop=2), st.integers(0, 10**6))
def test_two_covers_transfer(T, seed):
    S = stt.expand(T, stt.random_spec(random.Random(seed), T, max_mult=2))
    n = len(T)
    for a, b in covers(n):
        T1, T2 = T.subteam(a), T.subteam(b)
        assert any(stt.stutter_equivalent(T1, S.subteam(c)) and stt.stutter_equivalent(T2, S.subteam(d))
                   for c, d in covers(n)), (a, b)


@given(formulas(kinds=sm.FULL_X_FREE, size=6), teams(max_traces=3, max_prefix=2, max_loop=2), st.integers(0, 10**6))
def test_next_free_formulas_stutter_invariant(phi, T, seed):
    E = stt.expand(T, stt.random_spec(random.Random(seed), T))
    assert check(T, phi) == check(E, phi)


def test_next_distinguishes():
    from tltl.formula import parse
    T = single(["p"], [[]], [["p"]])
    E = stt.expand(T, Spec((2,), (1,)))
    assert check(T, parse("X p")) != check(E, parse("X p"))
