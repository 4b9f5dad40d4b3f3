import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tltl import arith as ar
from tltl import formula as fm
from tltl import kripke as kr
from tltl import reduction as rd
from tltl import sampling as sm
from tltl import suites
from tltl import trace as tr
from tltl.errors import FragmentViolation, ReductionError
from tltl.evaluator import check, check_classical
from tltl.team import Team, condition_masks

from conftest import ALPHABET, formulas, teams

parse = fm.parse
S = ar.parse_sexpr


class TestGadgets:
    def test_number_gadget(self):
        G = rd.gadget(rd.FIRST_ORDER)
        assert G.n == 4
        A = G.alphabet
        for n in range(9):
            t = tr.trace_from_names([[]] + [["0"]] * n + [["1"]], [["0", rd.END]], A)
            assert kr.trace_member(G, t)
        assert kr.trace_member(G, tr.trace_from_names([[]], [["0"]], A))

    def test_relation_gadget(self):
        G = rd.gadget(rd.SECOND_ORDER_UNARY)
        rng = random.Random(1)
        for _ in range(30):
            pre = [[rng.choice("01")] for _ in range(rng.randint(0, 4))]
            loop = [[rng.choice("01")] for _ in range(rng.randint(1, 3))]
            assert kr.trace_member(G, tr.trace_from_names([[]] + pre, loop, G.alphabet))

    def test_tuple_gadget(self):
        G = rd.gadget(rd.tuple_kind(2))
        assert G.n == 1 + 9
        for ns in itertools.product(range(4), repeat=2):
            t = rd.encode_tuple(ns, "A", list(G.alphabet) + ["@A"])
            assert kr.trace_member(G, tr.remap(t, list(G.alphabet) + ["@A"], G.alphabet))

    def test_tuple_projections(self):
        t = rd.encode_tuple((1, 0), "A")
        A = ["0", "1", rd.END, rd.digit(0, 2), rd.digit(1, 2), "@A"]
        names = [tr.names_of(tr.at(t, i), A) for i in range(4)]
        assert ["1" in n for n in names] == [False, False, True, False]
        assert [rd.digit(1, 2) in n for n in names] == [False, True, False, False]

    def test_assemble_one_variable(self):
        K, varmap = rd.assemble_K_phi(S("(exists (x1 1) (lt x1 x1))"))
        assert K.n == 4
        assert list(K.alphabet) == ["0", "1", rd.END, "@x1"]
        assert varmap == {"x1": rd.FIRST_ORDER}

    def test_assemble_shares_root_only(self):
        K, _ = rd.assemble_K_phi(S("(exists (x 1) (exists (A 2 1) (rel A x)))"))
        assert K.n == 1 + 3 + 2
        marks = [K.alphabet.index(m) for m in ("@x", "@A")]
        for w in range(K.n):
            carried = [b for b in marks if K.labels[w] >> b & 1]
            assert len(carried) == (0 if w == 0 else 1)
        assert kr.validate(K) == []

    def test_assemble_rejects_non_normal(self):
        with pytest.raises(ReductionError):
            rd.assemble_K_phi(S("(exists (x 1) (eq x x))"))


class TestEncodings:
    def test_number_zero(self):
        A = ["0", "1", rd.END, "@x"]
        assert rd.encode_number(0, "x") == tr.trace_from_names([[], ["1", "@x"]], [["0", rd.END, "@x"]], A)

    def test_set(self):
        t = rd.encode_set({0, 2}, "A")
        A = ["0", "1", "@A"]
        ones = [i for i in range(8) if "1" in tr.names_of(tr.at(t, i), A)]
        zeros = [i for i in range(1, 8) if "0" in tr.names_of(tr.at(t, i), A)]
        assert ones == [1, 3]
        assert zeros == [2, 4, 5, 6, 7]

    def test_periodic_set(self):
        t = rd.encode_set(rd.SetSpec((True,), (False, True)), "A")
        A = ["0", "1", "@A"]
        assert [("1" in tr.names_of(tr.at(t, i), A)) for i in range(1, 7)] == [True, False, True, False, True, False]

    def test_cap(self):
        with pytest.raises(ReductionError):
            rd.encode_number(rd.MAX_ENCODED + 1, "x")
        with pytest.raises(ReductionError):
            rd.encode_tuple((1, 2, 3, 4), "x")

    @pytest.mark.parametrize("kind,make", [
        (rd.FIRST_ORDER, lambda rng: rd.encode_number(rng.randint(0, 8), "v")),
        (rd.SECOND_ORDER_UNARY, lambda rng: rd.encode_set(rng.sample(range(6), rng.randint(0, 4)), "v")),
        (rd.tuple_kind(3), lambda rng: rd.encode_tuple([rng.randint(0, 3) for _ in range(3)], "v")),
    ], ids=["number", "set", "triple"])
    def test_members_of_marked_structure(self, kind, make):
        K = rd.gadget(kind)
        rng = random.Random(5)
        for _ in range(40):
            # drop the variable marker, which the unmarked gadget lacks
            t = tr.remap(make(rng), _alphabet_guess(kind), K.alphabet)
            assert kr.trace_member(K, t)
            # flip one bit of one position
            word = list(t.prefix) + list(t.loop)
            i = rng.randrange(len(word))
            b = rng.randrange(len(K.alphabet))
            word[i] ^= 1 << b
            bad = tr.lasso(word[:len(t.prefix)], word[len(t.prefix):])
            if kr.trace_member(K, bad):
                # still a legal gadget trace, so it must encode a different value
                assert tr.normalize(bad) != tr.normalize(t)


def _alphabet_guess(kind):
    if kind == rd.SECOND_ORDER_UNARY:
        return ["0", "1", "@v"]
    ell = kind.arity if kind.name == "SecondOrderTuple" else 1
    out = ["0", "1", rd.END]
    for k in range(2, ell + 1):
        out += [rd.digit(0, k), rd.digit(1, k)]
    return out + ["@v"]


class TestTranslation:
    def test_lt_shape(self):
        phi = rd.translate_atom(ar.Lt(ar.V("x1"), ar.V("x2")), suites.FO_X)
        assert fm.to_text(phi) == fm.to_text(parse("F ((@x1 ~> @end) & (@x2 ~> (1 & ~bot)))"))

    def test_lt_examples(self):
        phi = rd.translate_atom(ar.Lt(ar.V("x1"), ar.V("x2")), suites.FO_X)
        A = ["0", "1", rd.END, "@x1", "@x2"]
        for (a, b), want in [((2, 5), True), ((5, 2), False), ((3, 3), False)]:
            T = Team(A, [rd.encode_number(a, "x1", A), rd.encode_number(b, "x2", A)])
            assert check(T, phi) is want

    def test_atom_shadows_small(self):
        assert suites.lt_shadow(6)[0] == 0
        assert suites.member_shadow(6, 2)[0] == 0
        assert suites.family_shadow(3, 20, 4)[0] == 0

    def test_fragment(self):
        for text in suites.FRAGMENT_SENTENCES:
            _, phi, _ = rd.arith_to_mc(S(text))
            assert fm.fragment_check(phi, {"F"}, 1, lenient=True)

    def test_requires_normal_form(self):
        with pytest.raises(ReductionError):
            rd.translate_rho(S("(exists (x 1) (eq x 0))"))

    def test_universal_is_dual(self):
        f = rd.translate_rho(S("(forall (x 1) (exists (y 1) (lt x y)))"))
        assert f.kind is fm.Kind.BNEG

    @pytest.mark.parametrize("text,bound,expected", [
        ("(exists (x 1) (exists (y 1) (lt x y)))", 4, True),
        ("(exists (x 1) (lt x x))", 4, False),
        ("(exists (A 2 1) (exists (x 1) (rel A x)))", 3, True),
        ("(exists (x 1) (exists (A 2 1) (and (rel A x) (not (rel A x)))))", 3, False),
        ("(exists (x 1) (forall (y 1) (not (lt y x))))", 3, True),
    ])
    def test_bounded_universe(self, text, bound, expected):
        psi = S(text)
        T = rd.build_bounded_universe(psi, bound)
        assert check(T, rd.translate_rho(psi)) is expected

    def test_bounded_universe_contents(self):
        T = rd.build_bounded_universe(S("(exists (x 1) (exists (A 2 1) (rel A x)))"), 3)
        assert len(T) == 3 + 1 + 8

    def test_bounded_universe_limits(self):
        with pytest.raises(ReductionError):
            rd.build_bounded_universe(S("(exists (x 1) (lt x x))"), 13)
        with pytest.raises(ReductionError):
            rd.build_bounded_universe(S("(exists (A 2 2) (forall (x 1) (rel A x x)))"), 2)


class TestSubteamQuantifiers:
    @given(formulas(kinds=sm.PURE_LTL, size=3, max_td=1), formulas(kinds=sm.FULL, size=4, max_td=1),
           teams(max_traces=5, max_prefix=2, max_loop=2))
    def test_subteam_shrinking(self, gamma, psi, T):
        inside, outside = condition_masks(T, gamma)
        subsets = [m for m in range(T.full_mask() + 1) if m & ~inside == 0]
        expected = any(check(T.subteam(outside | m), psi) for m in subsets)
        assert check(T, fm.CondSubEx(gamma, psi)) == expected

    @given(formulas(kinds=sm.PURE_LTL, size=3, max_td=1), formulas(kinds=sm.FULL, size=4, max_td=1),
           teams(max_traces=5, max_prefix=2, max_loop=2))
    def test_singleton_shrinking(self, gamma, psi, T):
        inside, outside = condition_masks(T, gamma)
        singles = [1 << i for i in range(len(T)) if inside >> i & 1]
        expected = any(check(T.subteam(outside | m), psi) for m in singles)
        assert check(T, fm.CondSingEx(gamma, psi)) == expected


class TestPrototraces:
    PROPS = ["p", "q"]
    A = ["p", "q", rd.HASH]

    def t(self, prefix, loop):
        return tr.trace_from_names(prefix, loop, self.A)

    @pytest.mark.parametrize("x_free", [False, True])
    def test_recognizer(self, x_free):
        good = self.t([[], [], ["p"]], [[rd.HASH]])
        bad = self.t([[], ["p"], ["q"]], [[rd.HASH]])
        xi = rd.xi_sub_proto(self.PROPS, x_free=x_free)
        assert check(Team(self.A, [good]), xi)
        assert not check(Team(self.A, [bad]), xi)

    def test_stuttered_proto_only_without_next(self):
        long_p = self.t([[], ["p"], ["p"]], [[rd.HASH]])
        assert check(Team(self.A, [long_p]), rd.xi_sub_proto(self.PROPS, x_free=True))
        assert not check(Team(self.A, [long_p]), rd.xi_sub_proto(self.PROPS, x_free=False))

    def test_sup_proto(self):
        sup = rd.xi_sup_proto(self.PROPS)
        full = self.t([], [["p", "q"]])
        split = [self.t([], [["p"]]), self.t([], [["q"]])]
        assert check(Team(self.A, [full]), sup)
        assert check(Team(self.A, split), sup)
        # finitely many prototraces leave later positions uncovered
        protos = [self.t([[]] * k + [[p]], [[rd.HASH]]) for p in self.PROPS for k in range(4)]
        assert not check(Team(self.A, protos), sup)

    def test_alpha_on_constant_traces(self):
        A = ["p", "q"]
        const = Team(A, [tr.trace_from_names([["p"]], [["q"]], A)])
        moving = Team(A, [tr.trace_from_names([], [["p"], ["q"]], A)])
        assert check(const, rd.alpha(A))
        assert not check(moving, rd.alpha(A))


class TestMc2Sat:
    K = suites.FLIP_FLOP

    def test_with_next_contains_hook(self):
        phi = parse("G (p | q)")
        out = rd.mc2sat(phi, self.K, "withX")
        K2, props, _, _ = rd.mc2sat_setting(phi, self.K, "withX")
        chi = rd.chi_body(K2, props, with_next=True)
        assert out == fm.And(rd.xi_formula(props), fm.Hook(chi, phi))

    def test_x_free_two_branches(self):
        phi = parse("F G q")
        out = rd.mc2sat(phi, self.K, "xFree")
        parts = list(fm.iter_nodes(out))
        assert any(n.kind is fm.Kind.SPLIT_OR and fm.Prop(rd.XP) in set(fm.iter_nodes(n.left)) for n in parts)
        assert {rd.XP, rd.YP, rd.HASH} <= fm.props(out)

    @pytest.mark.parametrize("text", suites.MC_FORMULAS)
    def test_fragments(self, text):
        phi = parse(text)
        for mode in suites.mc_modes(phi)[1:]:
            assert fm.fragment_check(rd.mc2sat(phi, self.K, mode), {"F"}, 2, lenient=True), mode

    def test_deterministic(self):
        phi = parse("~F p | G F q")
        assert fm.to_text(rd.mc2sat(phi, self.K, "xFree")) == fm.to_text(rd.mc2sat(phi, self.K, "xFree"))

    def test_next_rejected_in_x_free_modes(self):
        with pytest.raises(FragmentViolation):
            rd.mc2sat(parse("X p"), self.K, "xFree")

    def test_depth_limit_for_finite_mode(self):
        with pytest.raises(FragmentViolation):
            rd.mc2sat(parse("F G q"), self.K, "finiteUlc")

    def test_unknown_mode(self):
        with pytest.raises(ReductionError):
            rd.mc2sat(parse("p"), self.K, "fast")

    def test_duplicate_labels(self):
        K = kr.kripke(["p"], [["p"], ["p"]], [(0, 1), (1, 0)])
        with pytest.raises(ReductionError):
            rd.mc2sat(parse("F p"), K, "ulcXFree")
        rd.mc2sat(parse("F p"), K, "xFree")

    def test_hash_reserved(self):
        with pytest.raises(ReductionError):
            rd.mc2sat(fm.Prop(rd.HASH), self.K, "withX")

    def test_too_few_propositions(self):
        K = kr.Kripke((), (0,), frozenset({(0, 0)}))
        with pytest.raises(ReductionError):
            rd.mc2sat_setting(fm.Top(), K, "xFree")


class TestRootGadget:
    def test_traces(self):
        props = ["p"]
        G = rd.root_gadget(props)
        assert kr.validate(G) == []
        traces = kr.enumerate_ulp_traces(G, 3, 2)
        A = G.alphabet
        root = tr.label_of([rd.ROOT], A)
        assert all(tr.at(t, 0) == root for t in traces)
        delayed_proto = tr.trace_from_names([[rd.ROOT], [], ["p"]], [[rd.HASH]], A)
        delayed_regular = tr.trace_from_names([[rd.ROOT], [rd.delayed("p")]], [["p"], []], A)
        assert delayed_proto in traces and delayed_regular in traces
        assert not kr.trace_member(G, tr.trace_from_names([[rd.ROOT], ["p"], ["p"]], [[rd.HASH]], A))
        assert not kr.trace_member(G, tr.trace_from_names([[rd.ROOT]], [[rd.ROOT]], A))
        assert check(Team(A, traces), rd.psi_root(props))

    def test_clique_covers_all_labels(self):
        G = rd.root_gadget(["p", "q"])
        assert G.n == 1 + 16 + 1 + 2 + 1

    def test_size_limit(self):
        with pytest.raises(ReductionError):
            rd.root_gadget(["a", "b", "c", "d"])
