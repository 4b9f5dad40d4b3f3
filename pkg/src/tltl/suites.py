"""Seeded property suites behind ``tltl props run`` and the acceptance tests.

Each suite returns a SuiteResult whose ``passed`` flag folds in its time
limit.  Output lines depend only on the seed, never on timing, so two runs
with the same seed print the same text.
"""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import arith as ar
from . import emit
from . import formula as fm
from . import reduction as rd
from . import sampling as sm
from . import stutter as st
from . import trace as tr
from .evaluator import check, check_classical, check_classical_shape, equiv_check, probe_downward_closed
from .formula import Kind
from .kripke import (
    ALL_ULP, UNCOUNTABLE, chi_formula, countability_class, enumerate_ulp_traces, kripke, trace_member,
)
from .team import Team, team_from_names


@dataclass
class SuiteResult:
    name: str
    ok: bool
    limit: float
    elapsed: float = 0.0
    lines: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.ok and self.elapsed < self.limit

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}"


def _timed(name: str, limit: float, body: Callable[[list[str]], bool]) -> SuiteResult:
    lines: list[str] = []
    start = time.perf_counter()
    ok = body(lines)
    return SuiteResult(name, bool(ok), limit, time.perf_counter() - start, lines)


# ---------------------------------------------------------------- motivating example

def motivating(seed: int = 0) -> SuiteResult:
    def body(out: list[str]) -> bool:
        T = team_from_names(["p"], [([["p"]], [[]]), ([[], ["p"]], [[]])])
        fp = check(T, fm.parse("F p"))
        fpfp = check(T, fm.parse("F p | F p"))
        out.append(f"F p -> {fp}; F p | F p -> {fpfp}")
        return fp is False and fpfp is True

    return _timed("motivating", 1.0, body)


# ---------------------------------------------------------------- singleton agreement

def singleton(seed: int = 0, cases: int = 1000) -> SuiteResult:
    def body(out: list[str]) -> bool:
        rng = random.Random(seed)
        alphabet = ["p", "q"]
        bad = 0
        for _ in range(cases):
            phi = sm.random_formula(rng, alphabet, size=rng.randint(1, 7), kinds=sm.PURE_LTL, max_td=3)
            t = sm.random_lasso(rng, len(alphabet), 4, 4)
            if check(Team(alphabet, [t]), phi) != check_classical(t, phi, alphabet):
                bad += 1
                if bad <= 3:
                    out.append(f"mismatch: {fm.to_text(phi)} on {tr.format_trace(t, alphabet)}")
        out.append(f"{cases} cases, {bad} mismatches")
        return bad == 0

    return _timed("singleton", 30.0, body)


# ---------------------------------------------------------------- downward closure

def downward(seed: int = 0, formulas: int = 200) -> SuiteResult:
    def body(out: list[str]) -> bool:
        rng = random.Random(seed)
        alphabet = ["p", "q"]
        pool = sorted({sm.random_lasso(rng, 2, 2, 2) for _ in range(12)}, key=lambda t: (t.prefix, t.loop))[:6]
        teams = [Team(alphabet, c) for c in itertools.combinations(pool, min(4, len(pool)))]
        empty = Team(alphabet, [])
        violations = empty_fail = 0
        for _ in range(formulas):
            phi = sm.random_formula(rng, alphabet, size=rng.randint(1, 6), kinds=sm.TILDE_FREE)
            if probe_downward_closed(phi, teams, len(teams)).found:
                violations += 1
                out.append(f"not downward closed: {fm.to_text(phi)}")
            if not check(empty, phi):
                empty_fail += 1
        out.append(f"pool {len(pool)} traces, {len(teams)} maximal teams, {formulas} formulas")
        out.append(f"violations {violations}, empty-team failures {empty_fail}")
        return violations == 0 and empty_fail == 0

    return _timed("downward", 60.0, body)


# ---------------------------------------------------------------- equivalences

def _eq_rewrites() -> list[tuple[str, Callable[[fm.Formula, fm.Formula], tuple[fm.Formula, fm.Formula]]]]:
    B = fm.BNeg
    return [
        ("G a == ~F~a", lambda a, b: (fm.Globally(a), B(fm.Future(B(a))))),
        ("F a == top U a", lambda a, b: (fm.Future(a), fm.Until(fm.Top(), a))),
        ("a R b == ~(~a U ~b)", lambda a, b: (fm.Release(a, b), B(fm.Until(B(a), B(b))))),
        ("dep native == desugared", lambda a, b: (fm.Dep([a], b), fm.desugar(fm.Dep([a], b)))),
    ]


def equivalences(seed: int = 0, teams: int = 500) -> SuiteResult:
    def body(out: list[str]) -> bool:
        rng = random.Random(seed)
        alphabet = ["p", "q"]
        ok = True
        for name, build in _eq_rewrites():
            stream = sm.team_stream(rng.getrandbits(32), alphabet, max_traces=4)
            bad = 0
            for _ in range(teams):
                a = sm.random_formula(rng, alphabet, 3, sm.FULL, max_td=2)
                b = sm.random_formula(rng, alphabet, 3, sm.FULL, max_td=2)
                lhs, rhs = build(a, b)
                if equiv_check(lhs, rhs, stream, 1).found:
                    bad += 1
            out.append(f"{name}: {bad} counterexamples in {teams} teams")
            ok &= bad == 0
        stream = sm.team_stream(rng.getrandbits(32), alphabet, max_traces=4)
        bad = 0
        for _ in range(teams):
            phi = sm.random_formula(rng, alphabet, 5, sm.FULL, max_td=2)
            if equiv_check(phi, fm.desugar(phi), stream, 1).found:
                bad += 1
        out.append(f"sugar native == desugared: {bad} counterexamples in {teams} teams")
        ok &= bad == 0
        control = equiv_check(fm.parse("F p | F p"), fm.parse("F p"),
                              sm.team_stream(seed, alphabet, max_traces=4), 100)
        out.append(f"negative control F p | F p vs F p: {control.status} after {control.samples} samples")
        return ok and control.found

    return _timed("equivalence", 120.0, body)


# ---------------------------------------------------------------- stuttering

STRETCH_ALPHABET = ["a", "b"]


def stretched_pair() -> tuple[Team, Team]:
    """Two teams over letters a, b related by f = (1,2,1)(1)^w and g = (2,2,2)(1)^w."""
    def word(s: str, loop: str):
        return [[c] for c in s], [[c] for c in loop]

    T = team_from_names(STRETCH_ALPHABET, [word("baab", "a"), word("aaaa", "b")])
    S = team_from_names(STRETCH_ALPHABET, [word("bbaabb", "a"), word("aaaaaa", "b")])
    return T, S


def stuttering(seed: int = 0, teams: int = 500, invariance: int = 1000) -> SuiteResult:
    def body(out: list[str]) -> bool:
        rng = random.Random(seed)
        alphabet = ["p", "q"]
        ok = True
        bad = 0
        for _ in range(teams):
            T = sm.random_team(rng, alphabet, 4, 3, 3, min_traces=1)
            c = st.canonical_stutter_free(T)
            E = st.expand(T, st.random_spec(rng, T))
            if st.canonical_stutter_free(c) != c or st.canonical_stutter_free(E) != c:
                bad += 1
        out.append(f"canonical form idempotent and expansion invariant: {bad} failures in {teams}")
        ok &= bad == 0

        T, S = stretched_pair()
        pair = st.stutter_equivalent(T, S)
        out.append(f"stretched pair stutter equivalent: {pair}")
        ok &= pair
        abc = ["p", "q", "z"]
        A = team_from_names(abc, [([["p"], ["p"], ["q"]], [["z"]])])
        Bt = team_from_names(abc, [([["p"], ["q"], ["q"]], [["z"]])])
        C = team_from_names(abc, [([["p"]], [["z"]])])
        pos, neg = st.stutter_equivalent(A, Bt), st.stutter_equivalent(A, C)
        out.append(f"{{p}}{{p}}{{q}}{{z}}^w vs {{p}}{{q}}{{q}}{{z}}^w: {pos}; vs {{p}}{{z}}^w: {neg}")
        ok &= pos and not neg

        bad = 0
        for _ in range(invariance):
            phi = sm.random_formula(rng, alphabet, rng.randint(1, 5), sm.FULL_X_FREE, max_td=2)
            T = sm.random_team(rng, alphabet, 3, 2, 2, min_traces=1)
            E = st.expand(T, st.random_spec(rng, T, 3))
            if check(T, phi) != check(E, phi):
                bad += 1
                if bad <= 3:
                    out.append(f"X-free violation: {fm.to_text(phi)}")
        out.append(f"X-free stutter invariance: {bad} violations in {invariance}")
        ok &= bad == 0

        found = None
        for i in range(2000):
            phi = sm.random_formula(rng, alphabet, rng.randint(1, 4), sm.PURE_LTL, max_td=2)
            if not any(n.kind is Kind.NEXT for n in fm.iter_nodes(phi)):
                continue
            T = sm.random_team(rng, alphabet, 2, 2, 2, min_traces=1)
            E = st.expand(T, st.random_spec(rng, T, 3))
            if check(T, phi) != check(E, phi):
                found = (phi, i + 1)
                break
        if found:
            out.append(f"X-bearing distinguishing formula {fm.to_text(found[0])} after {found[1]} draws")
        else:
            out.append("no X-bearing distinguishing case found")
        return ok and found is not None

    return _timed("stutter", 120.0, body)


# ---------------------------------------------------------------- characteristic formulas

def _satisfying_lassos(phi: fm.Formula, alphabet, labels: list[int], max_prefix: int, max_loop: int):
    """Normalized lassos up to the bounds, over the given labels, that satisfy phi classically."""
    out = set()
    for p in range(max_prefix + 1):
        for l in range(1, max_loop + 1):
            words = list(itertools.product(labels, repeat=p + l))
            for word, value in zip(words, check_classical_shape(words, p, phi, alphabet)):
                if value:
                    out.add(tr.lasso(word[:p], word[p:]))
    return out


def chi_adequacy(seed: int = 0, structures: int = 20, bound: int = 4) -> SuiteResult:
    """Bounded members of K' are exactly the bounded lassos satisfying chi.

    Candidates range over words of K' state labels: each state carries its own
    marker, so a position whose label is not a state label violates chi outright.
    """
    def body(out: list[str]) -> bool:
        rng = random.Random(seed)
        bad = 0
        for i in range(structures):
            K = sm.random_kripke(rng, 5)
            K2, chi = chi_formula(K)
            members = enumerate_ulp_traces(K2, bound, bound)
            sat = _satisfying_lassos(chi, K2.alphabet, sorted(set(K2.labels)), bound, bound)
            if sat != members:
                bad += 1
                out.append(f"structure {i}: {len(members)} members vs {len(sat)} satisfying")
        out.append(f"{structures} structures, {bad} disagreements")
        return bad == 0

    return _timed("chi", 60.0, body)


# ---------------------------------------------------------------- pairing and normal form

def pairing(seed: int = 0, inputs: int = 50) -> SuiteResult:
    def body(out: list[str]) -> bool:
        image = {ar.cantor_pair(n, m) for n in range(30) for m in range(30)}
        inverse = all(ar.cantor_unpair(ar.cantor_pair(n, m)) == (n, m) for n in range(30) for m in range(30))
        out.append(f"cantor image size {len(image)}, inverse round trip {inverse}")
        ok = len(image) == 900 and inverse

        graph_ok = True
        for n in range(4):
            for m in range(4 - n):
                z = ar.cantor_pair(n, m)
                f = ar.Forall("t", ar.FO, ar.Iff(ar.psi_2(ar.numeral(n), ar.numeral(m), ar.V("t")),
                                                 ar.Eq(ar.V("t"), ar.numeral(z))))
                graph_ok &= ar.bounded_eval(f, 8) if z < 8 else True
        out.append(f"graph formula agrees with the polynomial below 8: {graph_ok}")
        ok &= graph_ok

        rng = random.Random(seed)
        bad = 0
        for _ in range(inputs):
            n = ar.normalize_arity(sm.random_arith(rng))
            bad += bool(ar.shape_violations(n))
        out.append(f"normal form shape violations: {bad} of {inputs}")
        return ok and bad == 0

    return _timed("pairing", 30.0, body)


# ---------------------------------------------------------------- atom shadows

FO_X = {"x1": rd.FIRST_ORDER, "x2": rd.FIRST_ORDER}


def lt_shadow(limit: int = 12) -> tuple[int, int]:
    phi = rd.translate_atom(ar.Lt(ar.V("x1"), ar.V("x2")), FO_X)
    alphabet = ["0", "1", rd.END, "@x1", "@x2"]
    bad = total = 0
    for n1 in range(limit + 1):
        for n2 in range(limit + 1):
            T = Team(alphabet, [rd.encode_number(n1, "x1", alphabet), rd.encode_number(n2, "x2", alphabet)])
            total += 1
            bad += check(T, phi) != (n1 < n2)
    return bad, total


def member_shadow(limit: int = 10, support: int = 4) -> tuple[int, int]:
    varmap = {"x": rd.FIRST_ORDER, "A": rd.SECOND_ORDER_UNARY}
    phi = rd.translate_atom(ar.Rel("A", (ar.V("x"),)), varmap)
    alphabet = ["0", "1", rd.END, "@x", "@A"]
    bad = total = 0
    for k in range(support + 1):
        for S in itertools.combinations(range(limit + 1), k):
            setrace = rd.encode_set(S, "A", alphabet)
            for n in range(limit + 1):
                T = Team(alphabet, [rd.encode_number(n, "x", alphabet), setrace])
                total += 1
                bad += check(T, phi) != (n in S)
    return bad, total


def family_shadow(seed: int = 0, families: int = 150, universe: int = 6) -> tuple[int, int]:
    varmap = {"A": rd.SECOND_ORDER_UNARY, "a": rd.THIRD_ORDER_UNARY}
    phi = rd.translate_atom(ar.HO("a", ("A",)), varmap)
    alphabet = ["0", "1", "@A", "@a"]
    subsets = [frozenset(n for n in range(universe) if mask >> n & 1) for mask in range(1 << universe)]
    encoded_a = {S: rd.encode_set(S, "a", alphabet) for S in subsets}
    encoded_A = {S: rd.encode_set(S, "A", alphabet) for S in subsets}
    rng = random.Random(seed)
    bad = total = 0
    for _ in range(families):
        fam = set(rng.sample(subsets, rng.randint(0, 3)))
        base = [encoded_a[S] for S in fam]
        for A in subsets:
            total += 1
            bad += check(Team(alphabet, base + [encoded_A[A]]), phi) != (A in fam)
    return bad, total


def atom_shadows(seed: int = 0) -> SuiteResult:
    def body(out: list[str]) -> bool:
        ok = True
        for name, (bad, total) in [("x1 < x2", lt_shadow()), ("A(x)", member_shadow()),
                                   ("a(A)", family_shadow(seed))]:
            out.append(f"{name}: {bad} mismatches in {total}")
            ok &= bad == 0
        return ok

    return _timed("atoms", 120.0, body)


# ---------------------------------------------------------------- bounded universes

BOUNDED_SENTENCES = [
    ("(exists (x 1) (exists (y 1) (lt x y)))", True),
    ("(exists (x 1) (lt x x))", False),
]


def bounded_universes(seed: int = 0, bound: int = 4) -> SuiteResult:
    def body(out: list[str]) -> bool:
        ok = True
        for text, expected in BOUNDED_SENTENCES:
            psi = ar.parse_sexpr(text)
            got = check(rd.build_bounded_universe(psi, bound), rd.translate_rho(psi))
            out.append(f"{text} at bound {bound}: {got}")
            ok &= got == expected
        return ok

    return _timed("bounded", 60.0, body)


# ---------------------------------------------------------------- countability

def countability(seed: int = 0) -> SuiteResult:
    def body(out: list[str]) -> bool:
        relation = countability_class(rd.gadget(rd.SECOND_ORDER_UNARY))
        chain = kripke(["p"], [["p"], [], ["p"]], [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)])
        chained = countability_class(chain)
        flip = kripke(["0"], [["0"], ["0"]], [(0, 1), (1, 0)])
        traces = enumerate_ulp_traces(flip, 4, 4)
        expected = {tr.trace_from_names([], [["0"]], ["0"])}
        out.append(f"relation gadget: {relation}; self-loop chain: {chained}; "
                   f"two-state flip-flop traces: {sorted(tr.format_trace(t, ['0']) for t in traces)}")
        return relation == UNCOUNTABLE and chained == ALL_ULP and traces == expected

    return _timed("countability", 5.0, body)


# ---------------------------------------------------------------- fragments and goldens

FRAGMENT_SENTENCES = [
    "(exists (x 1) (exists (y 1) (lt x y)))",
    "(forall (x 1) (exists (y 1) (lt x y)))",
    "(exists (A 2 1) (forall (x 1) (implies (rel A x) (exists (y 1) (and (lt x y) (rel A y))))))",
    "(exists (A 2 2) (forall (x 1) (forall (y 1) (iff (rel A x y) (lt x y)))))",
    "(exists (a 3 1) (exists (A 2 1) (and (ho a A) (exists (x 1) (rel A x)))))",
    "(exists (x 1) (exists (y 1) (eq (plus x y) (times x y))))",
]

FLIP_FLOP = kripke(["p", "q"], [["p"], ["q"]], [(0, 1), (1, 0), (1, 1)])
MC_FORMULAS = ["G (p | q)", "F G q", "~F p | G F q", "F p & ~G q"]


def mc_modes(phi: fm.Formula) -> tuple[str, ...]:
    """Modes whose depth limit admits phi."""
    return rd.MODES if fm.temporal_depth(phi) <= 1 else rd.MODES[:3]


def golden_cases() -> dict[str, str]:
    """Deterministic emitted texts pinned by golden files."""
    out: dict[str, str] = {}
    for i, text in enumerate(FRAGMENT_SENTENCES):
        K, phi, _ = rd.arith_to_mc(ar.parse_sexpr(text))
        out[f"rho_{i}.txt"] = fm.to_text(phi) + "\n"
    for i, text in enumerate(MC_FORMULAS):
        phi = fm.parse(text)
        for mode in mc_modes(phi):
            if mode != "withX" or i == 0:
                out[f"mc2sat_{mode}_{i}.txt"] = fm.to_text(rd.mc2sat(phi, FLIP_FLOP, mode)) + "\n"
    out["emit_rho3_p.txt"] = ar.to_sexpr(emit.emit_rho3(fm.parse("p U ~X p"))) + "\n"
    out["emit_rho2_p.txt"] = ar.to_sexpr(emit.emit_rho2(fm.parse("p | X q"))) + "\n"
    out["normalize_tuple.txt"] = ar.to_sexpr(ar.normalize_arity(ar.parse_sexpr(FRAGMENT_SENTENCES[3]))) + "\n"
    return out


def fragments(seed: int = 0, golden_dir: str | Path | None = None) -> SuiteResult:
    def body(out: list[str]) -> bool:
        ok = True
        bad = 0
        for text in FRAGMENT_SENTENCES:
            _, phi, _ = rd.arith_to_mc(ar.parse_sexpr(text))
            bad += not fm.fragment_check(phi, {"F"}, 1, lenient=True)
        out.append(f"arithmetic translations outside LTL1(~,F): {bad} of {len(FRAGMENT_SENTENCES)}")
        ok &= bad == 0
        bad = total = 0
        for text in MC_FORMULAS:
            for mode in mc_modes(fm.parse(text))[1:]:
                total += 1
                bad += not fm.fragment_check(rd.mc2sat(fm.parse(text), FLIP_FLOP, mode), {"F"}, 2, lenient=True)
        out.append(f"X-free satisfiability formulas outside LTL2(~,F): {bad} of {total}")
        ok &= bad == 0
        first, second = golden_cases(), golden_cases()
        stable = first == second
        out.append(f"emitted texts identical across two runs: {stable}")
        ok &= stable
        if golden_dir is not None:
            root = Path(golden_dir)
            diff = [name for name, text in first.items()
                    if not (root / name).is_file() or (root / name).read_text(encoding="utf-8") != text]
            out.append(f"golden files differing: {len(diff)} of {len(first)}" + (f" ({', '.join(diff)})" if diff else ""))
            ok &= not diff
        return ok

    return _timed("fragments", 60.0, body)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "motivating": motivating,
    "singleton": singleton,
    "downward": downward,
    "equivalence": equivalences,
    "stutter": stuttering,
    "chi": chi_adequacy,
    "pairing": pairing,
    "atoms": atom_shadows,
    "bounded": bounded_universes,
    "countability": countability,
    "fragments": fragments,
}
