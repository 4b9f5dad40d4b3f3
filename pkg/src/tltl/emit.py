"""Translations of LTL(~) into arithmetic.

``emit_rho3`` encodes a team as a third-order variable ``a`` holding binary
relations S with S(j, k) iff proposition k holds at position j.
``emit_rho2`` encodes a countable team as a pair (I, P) with P(i, j, k) iff
proposition k holds at position j of trace i.  Propositions are numbered
from 1.  Numerals are unary terms.
"""
from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from . import formula as fm
from . import trace as tr
from .arith import (
    FO, AFormula, App, ArithType, BoundedEvaluator, Conj, Disj, Eq, Exists, Forall, Fresh, HO, Iff,
    Implies, Le, Lt, Not, One, Plus, Rel, Term, Var, Zero, conj, disj, exists, forall, numeral, rel,
    third, fn,
)
from .errors import ArithError
from .formula import Formula, Kind
from .kripke import Kripke
from .team import Team

TEAM_TYPE = third(2)
CORE = frozenset({Kind.PROP, Kind.NEG, Kind.AND, Kind.SPLIT_OR, Kind.BNEG, Kind.NEXT, Kind.UNTIL})


# ---------------------------------------------------------------- preparation


def prop_numbering(phi: Formula, first: Sequence[str] = ()) -> dict[str, int]:
    """Number propositions from 1: ``first`` in order, then the rest of φ's sorted."""
    order = list(dict.fromkeys(first))
    order += sorted(fm.props(phi) - set(order))
    return {p: i + 1 for i, p in enumerate(order)}


def prepare(phi: Formula, anchor: str | None = None) -> Formula:
    """Rewrite φ into atoms, atomic !, &, |, ~, X and U.

    Non-atomic ! becomes "no singleton satisfies", G/F/R use the usual
    dualities, top is ~(p & ~p) and bot is p & !p for an anchor proposition p.
    """
    anchor = anchor or min(fm.props(phi), default="p")
    p = fm.Prop(anchor)
    top = fm.BNeg(fm.And(p, fm.BNeg(p)))
    bot = fm.And(p, fm.Neg(p))

    def step(n: Formula, k: tuple[Formula, ...]) -> Formula:
        K = n.kind
        if K is Kind.TOP:
            return top
        if K is Kind.BOT:
            return bot
        if K is Kind.GLOBALLY:
            return fm.BNeg(fm.Until(top, fm.BNeg(k[0])))
        if K is Kind.FUTURE:
            return fm.Until(top, k[0])
        if K is Kind.RELEASE:
            return fm.BNeg(fm.Until(fm.BNeg(k[0]), fm.BNeg(k[1])))
        return fm.rebuild(n, k)

    out = fm.transform(fm.desugar(phi, neg_to_singleton=True), step)
    bad = {n.kind for n in fm.iter_nodes(out)} - CORE
    if bad:
        raise ArithError(f"unsupported node kinds after preparation: {sorted(k.value for k in bad)}")
    return out


# ---------------------------------------------------------------- third-order translation


class _Rho3:
    def __init__(self, index: Mapping[str, int], fresh: Fresh):
        self.index = index
        self.fresh = fresh

    def shift(self, a: str, d: Term, b: str) -> AFormula:
        S, S1, j, k = self.fresh("S"), self.fresh("S"), self.fresh("j"), self.fresh("k")
        inner = forall([(j, FO), (k, FO)], Iff(Rel(S, (Var(j), Var(k))), Rel(S1, (Plus(Var(j), d), Var(k)))))
        return Forall(S, rel(2), Iff(HO(b, (S,)), Exists(S1, rel(2), conj(HO(a, (S1,)), inner))))

    def rho(self, phi: Formula, a: str) -> AFormula:
        K = phi.kind
        if K is Kind.PROP or (K is Kind.NEG and phi.operand.kind is Kind.PROP):
            name = phi.name if K is Kind.PROP else phi.operand.name
            S = self.fresh("S")
            atom: AFormula = Rel(S, (Zero(), numeral(self.index[name])))
            return Forall(S, rel(2), Implies(HO(a, (S,)), atom if K is Kind.PROP else Not(atom)))
        if K is Kind.AND:
            return conj(self.rho(phi.left, a), self.rho(phi.right, a))
        if K is Kind.BNEG:
            return Not(self.rho(phi.operand, a))
        if K is Kind.SPLIT_OR:
            b, c, S = self.fresh("a"), self.fresh("a"), self.fresh("S")
            cover = Forall(S, rel(2), Iff(HO(a, (S,)), disj(HO(b, (S,)), HO(c, (S,)))))
            return exists([(b, TEAM_TYPE), (c, TEAM_TYPE)], conj(cover, self.rho(phi.left, b), self.rho(phi.right, c)))
        if K is Kind.NEXT:
            b = self.fresh("a")
            return Exists(b, TEAM_TYPE, conj(self.shift(a, One(), b), self.rho(phi.operand, b)))
        if K is Kind.UNTIL:
            d, e, b, c = self.fresh("d"), self.fresh("e"), self.fresh("a"), self.fresh("a")
            body = conj(
                self.shift(a, Var(d), b),
                self.shift(a, Var(e), c),
                self.rho(phi.right, b),
                Implies(Lt(Var(e), Var(d)), self.rho(phi.left, c)),
            )
            return Exists(d, FO, Forall(e, FO, exists([(b, TEAM_TYPE), (c, TEAM_TYPE)], body)))
        raise ArithError(f"unsupported node {K.value}")


def _index_for(phi: Formula, index: Mapping[str, int] | None) -> dict[str, int]:
    idx = dict(index) if index is not None else prop_numbering(phi)
    missing = fm.props(phi) - set(idx)
    if missing:
        raise ArithError(f"propositions without a number: {sorted(missing)}")
    return idx


def emit_rho3(phi: Formula, team_var: str = "a", index: Mapping[str, int] | None = None,
              fresh: Fresh | None = None) -> AFormula:
    """Formula with the single free third-order variable team_var of type (2)."""
    core = prepare(phi)
    idx = _index_for(core, index)
    return _Rho3(idx, fresh or Fresh({team_var})).rho(core, team_var)


def emit_rho3_sat(phi: Formula) -> AFormula:
    return Exists("a", TEAM_TYPE, emit_rho3(phi))


# ---------------------------------------------------------------- Kripke descriptions


def psi_frame(W: str, R: str, fresh: Fresh) -> AFormula:
    """W is finite, contains 0, and R is a serial relation on W.

    Seriality is required on W only; requiring an R-successor for every
    number would contradict R being inside W x W with W finite.
    """
    n, m, m2, n2, m3, n3 = (fresh(v) for v in ("n", "m", "m", "n", "m", "n"))
    return conj(
        Rel(W, (Zero(),)),
        Exists(n, FO, Forall(m, FO, Implies(Rel(W, (Var(m),)), Lt(Var(m), Var(n))))),
        Forall(m2, FO, Implies(Rel(W, (Var(m2),)), Exists(n2, FO, Rel(R, (Var(m2), Var(n2)))))),
        forall([(m3, FO), (n3, FO)], Implies(Rel(R, (Var(m3), Var(n3))), conj(Rel(W, (Var(m3),)), Rel(W, (Var(n3),))))),
    )


def psi_path(W: str, R: str, path: str, fresh: Fresh) -> AFormula:
    j = fresh("j")
    pj = App(path, (Var(j),))
    return conj(
        Eq(App(path, (Zero(),)), Zero()),
        Forall(j, FO, conj(Rel(W, (pj,)), Rel(R, (pj, App(path, (Plus(Var(j), One()),)))))),
    )


def psi_trace(W: str, R: str, eta: str, S: str, fresh: Fresh) -> AFormula:
    path, j, k = fresh("pi"), fresh("j"), fresh("k")
    same = forall([(j, FO), (k, FO)], Iff(Rel(S, (Var(j), Var(k))), Rel(eta, (App(path, (Var(j),)), Var(k)))))
    return Exists(path, fn(1), conj(psi_path(W, R, path, fresh), same))


def psi_generated(W: str, R: str, eta: str, a: str, fresh: Fresh) -> AFormula:
    S = fresh("S")
    return Forall(S, rel(2), Iff(HO(a, (S,)), psi_trace(W, R, eta, S, fresh)))


def psi_eq_structure(K: Kripke, W: str, R: str, eta: str, index: Mapping[str, int], fresh: Fresh) -> AFormula:
    """W, R and eta coincide with the given structure (states 0..m-1, root 0)."""
    K = root_first(K)
    n = fresh("n")
    eq_w = Forall(n, FO, Iff(Rel(W, (Var(n),)), Lt(Var(n), numeral(K.n))))
    n1, m1 = fresh("n"), fresh("m")
    edges = [conj(Eq(Var(n1), numeral(i)), Eq(Var(m1), numeral(j))) for i, j in sorted(K.edges)]
    eq_r = forall([(n1, FO), (m1, FO)], Iff(Rel(R, (Var(n1), Var(m1))), disj(*edges)))
    n2, k2 = fresh("n"), fresh("k")
    pairs = [
        conj(Eq(Var(n2), numeral(w)), Eq(Var(k2), numeral(index[p])))
        for w in range(K.n)
        for p in K.label_names(w)
    ]
    eq_eta = forall([(n2, FO), (k2, FO)], Iff(Rel(eta, (Var(n2), Var(k2))), disj(*pairs)))
    return conj(eq_w, eq_r, eq_eta)


def root_first(K: Kripke) -> Kripke:
    """Swap state names so that the root is state 0."""
    if K.root == 0:
        return K
    r = K.root
    perm = list(range(K.n))
    perm[0], perm[r] = r, 0
    labels = list(K.labels)
    labels[0], labels[r] = labels[r], labels[0]
    return Kripke(K.alphabet, tuple(labels), frozenset((perm[a], perm[b]) for a, b in K.edges), 0)


def _structure_numbering(phi: Formula, K: Kripke) -> dict[str, int]:
    return prop_numbering(phi, K.alphabet)


def emit_rho3_finsat(phi: Formula) -> AFormula:
    fresh = Fresh({"a", "W", "R", "eta"})
    body = conj(psi_frame("W", "R", fresh), psi_generated("W", "R", "eta", "a", fresh),
                emit_rho3(phi, "a", fresh=fresh))
    return exists([("W", rel(1)), ("R", rel(2)), ("eta", rel(2)), ("a", TEAM_TYPE)], body)


def emit_rho3_mc(phi: Formula, K: Kripke) -> AFormula:
    fresh = Fresh({"a", "W", "R", "eta"})
    idx = _structure_numbering(phi, K)
    body = conj(
        psi_frame("W", "R", fresh),
        psi_generated("W", "R", "eta", "a", fresh),
        psi_eq_structure(K, "W", "R", "eta", idx, fresh),
        emit_rho3(phi, "a", idx, fresh),
    )
    return exists([("W", rel(1)), ("R", rel(2)), ("eta", rel(2)), ("a", TEAM_TYPE)], body)


# ---------------------------------------------------------------- second-order translation


class _Rho2:
    def __init__(self, index: Mapping[str, int], fresh: Fresh):
        self.index = index
        self.fresh = fresh

    def shift(self, P: str, d: Term, Q: str) -> AFormula:
        i, j, k = self.fresh("i"), self.fresh("j"), self.fresh("k")
        return forall([(i, FO), (j, FO), (k, FO)],
                      Iff(Rel(Q, (Var(i), Var(j), Var(k))), Rel(P, (Var(i), Plus(Var(j), d), Var(k)))))

    def rho(self, phi: Formula, I: str, P: str) -> AFormula:
        K = phi.kind
        if K is Kind.PROP or (K is Kind.NEG and phi.operand.kind is Kind.PROP):
            name = phi.name if K is Kind.PROP else phi.operand.name
            i = self.fresh("i")
            atom: AFormula = Rel(P, (Var(i), Zero(), numeral(self.index[name])))
            return Forall(i, FO, Implies(Rel(I, (Var(i),)), atom if K is Kind.PROP else Not(atom)))
        if K is Kind.AND:
            return conj(self.rho(phi.left, I, P), self.rho(phi.right, I, P))
        if K is Kind.BNEG:
            return Not(self.rho(phi.operand, I, P))
        if K is Kind.SPLIT_OR:
            I1, I2, i = self.fresh("I"), self.fresh("I"), self.fresh("i")
            cover = Forall(i, FO, Iff(Rel(I, (Var(i),)), disj(Rel(I1, (Var(i),)), Rel(I2, (Var(i),)))))
            return exists([(I1, rel(1)), (I2, rel(1))],
                          conj(cover, self.rho(phi.left, I1, P), self.rho(phi.right, I2, P)))
        if K is Kind.NEXT:
            P1 = self.fresh("P")
            return Exists(P1, rel(3), conj(self.shift(P, One(), P1), self.rho(phi.operand, I, P1)))
        if K is Kind.UNTIL:
            d, e, P1, P2 = self.fresh("d"), self.fresh("e"), self.fresh("P"), self.fresh("P")
            body = conj(
                self.shift(P, Var(d), P1),
                self.shift(P, Var(e), P2),
                self.rho(phi.right, I, P1),
                Implies(Lt(Var(e), Var(d)), self.rho(phi.left, I, P2)),
            )
            return Exists(d, FO, Forall(e, FO, exists([(P1, rel(3)), (P2, rel(3))], body)))
        raise ArithError(f"unsupported node {K.value}")


def emit_rho2(phi: Formula, index_var: str = "I", prop_var: str = "P",
              index: Mapping[str, int] | None = None, fresh: Fresh | None = None) -> AFormula:
    """Formula with free I (unary) and P (ternary)."""
    core = prepare(phi)
    idx = _index_for(core, index)
    return _Rho2(idx, fresh or Fresh({index_var, prop_var})).rho(core, index_var, prop_var)


def psi_periodic(row: Callable[[Term, Term], AFormula], fresh: Fresh, constant: bool = False) -> AFormula:
    """Some period d > 0 (d = 1 when constant) repeats the row from some c on."""
    c, d, j, k = fresh("c"), fresh("d"), fresh("j"), fresh("k")
    dt: Term = One() if constant else Var(d)
    body = conj(
        Lt(Zero(), dt),
        forall([(j, FO), (k, FO)], Implies(Le(Var(c), Var(j)), Iff(row(Var(j), Var(k)), row(Plus(Var(j), dt), Var(k))))),
    )
    return Exists(c, FO, body if constant else Exists(d, FO, body))


def psi_ulp(i: str, P: str, fresh: Fresh, constant: bool = False) -> AFormula:
    return psi_periodic(lambda j, k: Rel(P, (Var(i), j, k)), fresh, constant)


def _sat_ulp(phi: Formula, constant: bool) -> AFormula:
    fresh = Fresh({"I", "P"})
    i = fresh("i")
    rho = emit_rho2(phi, fresh=fresh)
    guard = Forall(i, FO, Implies(Rel("I", (Var(i),)), psi_ulp(i, "P", fresh, constant)))
    return exists([("I", rel(1)), ("P", rel(3))], conj(rho, guard))


def emit_rho2_sat_ulp(phi: Formula) -> AFormula:
    return _sat_ulp(phi, False)


def emit_rho2_sat_ulc(phi: Formula) -> AFormula:
    return _sat_ulp(phi, True)


def psi_generated_ulp(W: str, R: str, eta: str, I: str, P: str, fresh: Fresh, constant: bool = False) -> AFormula:
    """The rows of P indexed by I are exactly the periodic traces of the structure."""
    S, i, j, k = fresh("S"), fresh("i"), fresh("j"), fresh("k")
    periodic = psi_periodic(lambda jj, kk: Rel(S, (jj, kk)), fresh, constant)
    stored = Exists(i, FO, conj(
        Rel(I, (Var(i),)),
        forall([(j, FO), (k, FO)], Iff(Rel(S, (Var(j), Var(k))), Rel(P, (Var(i), Var(j), Var(k))))),
    ))
    return Forall(S, rel(2), Iff(conj(psi_trace(W, R, eta, S, fresh), periodic), stored))


_FIN_DECLS = [("W", rel(1)), ("R", rel(2)), ("eta", rel(2)), ("I", rel(1)), ("P", rel(3))]


def emit_rho2_finsat_ulp(phi: Formula, constant: bool = False) -> AFormula:
    fresh = Fresh({"W", "R", "eta", "I", "P"})
    body = conj(
        psi_frame("W", "R", fresh),
        psi_generated_ulp("W", "R", "eta", "I", "P", fresh, constant),
        emit_rho2(phi, fresh=fresh),
    )
    return exists(_FIN_DECLS, body)


def emit_rho2_mc_ulp(phi: Formula, K: Kripke, constant: bool = False) -> AFormula:
    fresh = Fresh({"W", "R", "eta", "I", "P"})
    idx = _structure_numbering(phi, K)
    body = conj(
        psi_frame("W", "R", fresh),
        psi_generated_ulp("W", "R", "eta", "I", "P", fresh, constant),
        psi_eq_structure(K, "W", "R", "eta", idx, fresh),
        emit_rho2(phi, index=idx, fresh=fresh),
    )
    return exists(_FIN_DECLS, body)


# ---------------------------------------------------------------- finite teams as (I, P)


class TeamRows:
    """The ternary relation P of a finite lasso team, shifted by ``offset``.

    Membership of (i, j, k) is decided on the lasso directly, so the
    relation is infinite but exact.
    """

    def __init__(self, traces: Sequence[tr.LassoTrace], bit_of: Mapping[int, int], offset: int = 0):
        self.traces = tuple(traces)
        self.bit_of = dict(bit_of)
        self.offset = offset

    def __contains__(self, key) -> bool:
        i, j, k = key
        if not 0 <= i < len(self.traces) or k not in self.bit_of:
            return False
        return bool(tr.at(self.traces[i], j + self.offset) >> self.bit_of[k] & 1)

    def shifted(self, d: int) -> "TeamRows":
        return TeamRows(self.traces, self.bit_of, self.offset + d)

    def __eq__(self, other) -> bool:
        return isinstance(other, TeamRows) and (self.traces, self.offset) == (other.traces, other.offset)

    def __hash__(self) -> int:
        return hash((self.traces, self.offset))


def encode_team_ip(T: Team, index: Mapping[str, int]) -> tuple[frozenset[tuple[int]], TeamRows]:
    """I as a set of 1-tuples (the evaluator's relation format) and P."""
    bit_of = {index[p]: b for b, p in enumerate(T.alphabet) if p in index}
    return frozenset((i,) for i in range(len(T))), TeamRows(T.traces, bit_of)


def check_rho2_bounded(T: Team, phi: Formula, max_quantifiers: int = 64) -> bool:
    """Evaluate emit_rho2(φ) on T's encoding.

    Shifted copies of P are drawn from the genuine shifts of P (each shift
    relation is pinned down by its defining conjunct), subsets I' range over
    subsets of the trace indices, and numbers range over [0, H + 2), which
    contains every minimal until-witness and every trace index.
    """
    idx = prop_numbering(phi, T.alphabet)
    f = emit_rho2(phi, index=idx)
    I, P = encode_team_ip(T, idx)
    h = T.horizon()
    bound = max(h.H + 2, len(T) + 1, max(idx.values(), default=0) + 1)

    def witnesses(name: str, typ: ArithType, env: dict) -> Iterable[object] | None:
        if typ == rel(3):
            return [P.shifted(d) for d in range(h.H + 1)]
        return None

    ev = BoundedEvaluator(bound, max(len(T), 1), max_quantifiers=max_quantifiers, witnesses=witnesses)
    return ev.run(f, {"I": I, "P": P})
