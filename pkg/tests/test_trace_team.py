import pytest
from hypothesis import given
from hypothesis import strategies as st

from tltl import formula as fm
from tltl import trace as tr
from tltl.errors import HorizonOverflow
from tltl.team import (
    Team, canonical_shift, condition, condition_masks, horizon, snapshot, team_from_json, team_from_names,
    team_suffix, team_to_json, unsnapshot,
)

from conftest import lassos, teams

P, Q, PQ, E = 0b01, 0b10, 0b11, 0


def T(prefix, loop):
    return tr.lasso(prefix, loop)


class TestAt:
    def test_examples(self):
        t = T([P], [E])
        assert tr.at(t, 0) == P and tr.at(t, 7) == E
        assert tr.at(T([], [P, Q]), 3) == Q


class TestSuffix:
    def test_examples(self):
        assert tr.suffix(T([E, P], [E]), 1) == T([P], [E])
        t = T([P, Q], [E, P, Q])
        assert tr.suffix(t, 0) == tr.normalize(t)
        assert tr.suffix(T([], [P, Q]), 5) == T([], [Q, P])

    @given(lassos(), st.integers(0, 8), st.integers(0, 8))
    def test_composition(self, t, a, b):
        left, right = tr.suffix(tr.suffix(t, a), b), tr.suffix(t, a + b)
        assert all(tr.at(left, i) == tr.at(right, i) for i in range(50))
        assert left == right


class TestProject:
    def test_examples(self):
        assert tr.project(T([], [PQ]), P) == T([], [P])
        assert tr.project(T([P], [Q]), 0) == T([], [E])
        assert tr.project(T([P, Q], [PQ]), Q) == T([E], [Q])

    @given(lassos(), st.integers(0, 6), st.integers(0, 3))
    def test_commutes_with_suffix(self, t, k, mask):
        assert tr.project(tr.suffix(t, k), mask) == tr.suffix(tr.project(t, mask), k)


class TestNormalize:
    def test_examples(self):
        a, b = P, Q
        assert tr.normalize(tr.LassoTrace((a,), (b, b))) == tr.LassoTrace((a,), (b,))
        assert tr.normalize(tr.LassoTrace((a, b), (b,))) == tr.LassoTrace((a,), (b,))
        assert tr.normalize(tr.LassoTrace((), (a, b, a, b))) == tr.LassoTrace((), (a, b))

    @given(lassos(max_prefix=5, max_loop=5))
    def test_idempotent(self, t):
        assert tr.normalize(t) == t and tr.normalize(tr.normalize(t)) == tr.normalize(t)

    @given(lassos(), st.integers(0, 3), st.integers(1, 3))
    def test_unrolled_representations_agree(self, t, extra, times):
        raw = tr.LassoTrace(tuple(t.prefix) + tuple(t.loop) * extra, tuple(t.loop) * times)
        assert tr.normalize(raw) == t

    def test_empty_loop_rejected(self):
        with pytest.raises(ValueError):
            tr.LassoTrace((P,), ())


class TestConstancy:
    def test_examples(self):
        assert tr.is_ultimately_constant(T([P], [E])) and not tr.is_constant(T([P], [E]))
        assert tr.is_ultimately_constant(T([], [P])) and tr.is_constant(T([], [P]))
        t = T([], [P, E])
        assert not tr.is_ultimately_constant(t) and not tr.is_constant(t)


class TestLabels:
    def test_named_round_trip(self):
        alphabet = ["p", "q"]
        t = tr.trace_from_names([["p"], []], [["q"]], alphabet)
        assert tr.trace_from_json(tr.trace_to_json(t, alphabet), alphabet) == t
        assert tr.format_trace(t, alphabet) == "{p}{}({q})^w"

    def test_alphabet_cap(self):
        with pytest.raises(Exception):
            tr.check_alphabet([f"p{i}" for i in range(tr.MAX_ALPHABET + 1)])


class TestTeam:
    def test_duplicates_merged(self):
        team = Team(["p"], [T([P], [E]), tr.LassoTrace((P, E), (E, E))])
        assert len(team) == 1

    def test_suffix_examples(self):
        team = Team(["p"], [T([E, P], [E]), T([P], [E])])
        assert team_suffix(team, 1) == Team(["p"], [T([P], [E]), T([], [E])])
        assert team_suffix(team, 0) == team
        swap = Team(["p"], [T([], [P, E]), T([], [E, P])])
        assert team_suffix(swap, 1) == swap and len(team_suffix(swap, 1)) == 2

    def test_horizon_examples(self):
        team = Team(["p", "q"], [T([P], [P, Q]), T([], [P, Q, E])])
        h = horizon(team)
        assert (h.P, h.L, h.H) == (1, 6, 7)
        empty = horizon(Team(["p"], []))
        assert (empty.P, empty.L, empty.H) == (0, 1, 1)
        assert horizon(Team(["p", "q"], [T([Q, Q, Q, Q], [P, E, E, E, E])])).H == 9

    def test_horizon_overflow(self):
        loops = [T([], [P] + [E] * (n - 1)) for n in (1009, 1013, 1019)]
        with pytest.raises(HorizonOverflow):
            horizon(Team(["p"], loops))

    def test_canonical_shift_examples(self):
        team = Team(["p"], [T([P, E], [P, E, E])])
        assert canonical_shift(team, 9) == 3 and canonical_shift(team, 1) == 1

    @given(teams(), st.integers(0, 30))
    def test_canonical_shift_preserves_suffix(self, team, k):
        assert team_suffix(team, k) == team_suffix(team, canonical_shift(team, k))

    @given(teams(min_traces=1), st.integers(0, 12))
    def test_period(self, team, extra):
        h = team.horizon()
        k = h.P + extra
        assert team_suffix(team, k + h.L) == team_suffix(team, k)
        assert len(team_suffix(team, k)) <= len(team)

    def test_condition_examples(self):
        team = Team(["p"], [T([], [P]), T([], [E])])
        assert condition(team, fm.Prop("p")) == Team(["p"], [T([], [P])])
        assert condition(team, fm.Top()) == team

    def test_condition_on_prototraces(self):
        alphabet = ["p", "@hash"]
        team = team_from_names(alphabet, [([[], ["p"]], [["@hash"]]), ([["p"]], [[]]), ([], [["p"]])])
        assert condition(team, fm.Future(fm.Prop("@hash"))) == team_from_names(alphabet, [([[], ["p"]], [["@hash"]])])

    @given(teams(), st.sampled_from(["p", "F q", "G (p | q)", "X !p"]))
    def test_condition_partitions(self, team, text):
        inside, outside = condition_masks(team, fm.parse(text))
        assert inside & outside == 0 and inside | outside == team.full_mask()

    def test_json_round_trip(self):
        team = team_from_names(["p", "q"], [([["p"]], [[]]), ([], [["p", "q"], ["q"]])])
        assert team_from_json(team_to_json(team)) == team


class TestSnapshot:
    def test_examples(self):
        s = snapshot(Team(["p"], [T([], [P])]))
        assert s == T([], [1])
        assert snapshot(Team(["p"], [])) == T([], [0])

    @given(teams(min_traces=1))
    def test_round_trip(self, team):
        back = unsnapshot(snapshot(team), team.alphabet, len(team))
        assert Team(team.alphabet, back) == team
