"""Reductions between arithmetic, model checking and satisfiability.

Arithmetic to model checking: gadget structures whose traces encode
numbers, sets and tuples, the merged structure for a normal-form sentence,
trace encodings of values, and the translation of the sentence into a
team formula.

Model checking to satisfiability: characteristic formulas, the prototrace
formulas defining the full team, the X-free and ultimately constant
variants, and the delayed-root variant for finitely generated teams.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import formula as fm
from . import trace as tr
from .arith import (
    FO, AFormula, ArithType, Conj, Const, Disj, Exists, Forall, HO, Iff, Implies, Lt, Not, Rel, Var,
    prenex, rel, shape_violations, split_prefix, third,
)
from .errors import AlphabetOverflow, FragmentViolation, ReductionError
from .formula import Formula
from .kripke import Kripke, chi_formula, state_prop
from .team import Team
from .trace import LassoTrace

END = "@end"
HASH = "@hash"
ROOT = "@root"
MAX_ENCODED = 10_000


def digit(bit: int, k: int = 1) -> str:
    """Digit proposition: 0/1 for the first component, @d0_k/@d1_k otherwise."""
    if bit not in (0, 1) or k not in (1, 2, 3):
        raise ValueError("digit takes a bit and a component 1..3")
    return str(bit) if k == 1 else f"@d{bit}_{k}"


def marker(var: str) -> str:
    name = "@" + var
    if not fm.NAME_RE.fullmatch(name):
        raise ReductionError(f"variable name {var!r} cannot be turned into a proposition")
    return name


# ---------------------------------------------------------------- variable kinds


@dataclass(frozen=True)
class VarKind:
    name: str
    arity: int = 1

    def __str__(self) -> str:
        return self.name if self.name != "SecondOrderTuple" else f"{self.name}({self.arity})"


FIRST_ORDER = VarKind("FirstOrder")
SECOND_ORDER_UNARY = VarKind("SecondOrderUnary")
THIRD_ORDER_UNARY = VarKind("ThirdOrderUnary")


def tuple_kind(arity: int) -> VarKind:
    if arity not in (2, 3):
        raise ValueError("tuple relations have arity 2 or 3")
    return VarKind("SecondOrderTuple", arity)


def kind_of(t: ArithType) -> VarKind:
    if t == FO:
        return FIRST_ORDER
    if t == rel(1):
        return SECOND_ORDER_UNARY
    if t.order == 2 and not t.function and t.arity in (2, 3):
        return tuple_kind(t.arity)
    if t == third(1):
        return THIRD_ORDER_UNARY
    raise ReductionError(f"type {t.sexpr()} is outside the normal form")


# ---------------------------------------------------------------- gadgets

_PRE, _ONE, _POST = 0, 1, 2
_STEP = {_PRE: (_PRE, _ONE), _ONE: (_POST,), _POST: (_POST,)}


def _tuple_gadget(ell: int) -> tuple[list[frozenset[str]], set[tuple[int, int]]]:
    """Product of ell number gadgets; state 0 is the root."""
    states = list(itertools.product((_PRE, _ONE, _POST), repeat=ell))
    index = {s: i + 1 for i, s in enumerate(states)}
    labels = [frozenset()]
    for s in states:
        lab = {digit(1 if c == _ONE else 0, k + 1) for k, c in enumerate(s)}
        if all(c == _POST for c in s):
            lab.add(END)
        labels.append(frozenset(lab))
    edges = {(0, index[s]) for s in itertools.product((_PRE, _ONE), repeat=ell)}
    for s in states:
        for nxt in itertools.product(*(_STEP[c] for c in s)):
            edges.add((index[s], index[nxt]))
    return labels, edges


def _relation_gadget() -> tuple[list[frozenset[str]], set[tuple[int, int]]]:
    labels = [frozenset(), frozenset({"0"}), frozenset({"1"})]
    edges = {(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)}
    return labels, edges


def _gadget_parts(kind: VarKind):
    if kind == FIRST_ORDER:
        return _tuple_gadget(1)
    if kind.name == "SecondOrderTuple":
        return _tuple_gadget(kind.arity)
    if kind in (SECOND_ORDER_UNARY, THIRD_ORDER_UNARY):
        return _relation_gadget()
    raise ReductionError(f"unknown variable kind {kind}")


def _alphabet_for(kinds: Iterable[VarKind]) -> list[str]:
    kinds = list(kinds)
    out = ["0", "1"]
    if any(k == FIRST_ORDER or k.name == "SecondOrderTuple" for k in kinds):
        out.append(END)
    ell = max((k.arity for k in kinds if k.name == "SecondOrderTuple"), default=1)
    for k in range(2, ell + 1):
        out += [digit(0, k), digit(1, k)]
    return out


def gadget(kind: VarKind) -> Kripke:
    """The unmarked gadget structure for one variable kind, rooted at 0."""
    labels, edges = _gadget_parts(kind)
    alphabet = _alphabet_for([kind])
    return Kripke(tuple(alphabet), tuple(tr.label_of(l, alphabet) for l in labels), frozenset(edges), 0)


def assemble_K_phi(psi: AFormula) -> tuple[Kripke, dict[str, VarKind]]:
    """Merge one marked gadget per bound variable at a shared root."""
    problems = shape_violations(psi)
    if problems:
        raise ReductionError("not in normal form: " + "; ".join(problems))
    prefix, _ = split_prefix(psi)
    varmap = {v: kind_of(t) for _, v, t in prefix}
    alphabet = _alphabet_for(varmap.values()) + [marker(v) for v in varmap]
    if len(alphabet) > tr.MAX_ALPHABET:
        raise AlphabetOverflow(f"{len(varmap)} variables need {len(alphabet)} propositions")
    labels: list[frozenset[str]] = [frozenset()]
    edges: set[tuple[int, int]] = set()
    for v, kind in varmap.items():
        glabels, gedges = _gadget_parts(kind)
        base = len(labels) - 1
        labels += [lab | {marker(v)} for lab in glabels[1:]]
        shift = lambda s: 0 if s == 0 else s + base  # noqa: E731
        edges |= {(shift(a), shift(b)) for a, b in gedges}
    K = Kripke(tuple(alphabet), tuple(tr.label_of(l, alphabet) for l in labels), frozenset(edges), 0)
    return K, varmap


# ---------------------------------------------------------------- encodings


@dataclass(frozen=True)
class SetSpec:
    """Membership bits of an ultimately periodic set: n is in the set iff bit n of prefix+loop^w."""

    prefix: tuple[bool, ...]
    loop: tuple[bool, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("loop must be nonempty")


def _as_spec(spec) -> SetSpec:
    if isinstance(spec, SetSpec):
        return spec
    members = sorted(set(int(n) for n in spec))
    if members and (members[0] < 0 or members[-1] > MAX_ENCODED):
        raise ReductionError("set members must lie in [0, 10^4]")
    top = members[-1] + 1 if members else 0
    return SetSpec(tuple(n in members for n in range(top)), (False,))


def _default_alphabet(var: str, ell: int = 1, end: bool = True) -> list[str]:
    out = ["0", "1"] + ([END] if end else [])
    for k in range(2, ell + 1):
        out += [digit(0, k), digit(1, k)]
    return out + [marker(var)]


def _check_value(n: int) -> None:
    if not 0 <= n <= MAX_ENCODED:
        raise ReductionError(f"value {n} outside [0, {MAX_ENCODED}]")


def encode_number(n: int, var: str, alphabet: Sequence[str] | None = None) -> LassoTrace:
    """The number-gadget trace for n, marked with @var."""
    return encode_tuple((n,), var, alphabet)


def encode_stuck(var: str, alphabet: Sequence[str] | None = None, ell: int = 1) -> LassoTrace:
    """The number-gadget trace that never reaches its 1."""
    alphabet = list(alphabet or _default_alphabet(var, ell))
    m = marker(var)
    return tr.trace_from_names([[]], [[digit(0, k) for k in range(1, ell + 1)] + [m]], alphabet)


def encode_tuple(ns: Sequence[int], var: str, alphabet: Sequence[str] | None = None) -> LassoTrace:
    """Superposition of one number word per component; @end after every 1 is passed."""
    ns = tuple(ns)
    if not 1 <= len(ns) <= 3:
        raise ReductionError("tuples have 1 to 3 components")
    for n in ns:
        _check_value(n)
    alphabet = list(alphabet or _default_alphabet(var, len(ns)))
    m = marker(var)
    last = max(ns)

    def label(pos: int) -> list[str]:
        lab = [digit(1 if pos == n else 0, k + 1) for k, n in enumerate(ns)] + [m]
        if pos > last:
            lab.append(END)
        return lab

    prefix = [[]] + [label(pos) for pos in range(last + 1)]
    return tr.trace_from_names(prefix, [label(last + 1)], alphabet)


def encode_set(spec, var: str, alphabet: Sequence[str] | None = None) -> LassoTrace:
    """Relation-gadget trace: position n+1 carries 1 iff n is in the set, 0 otherwise."""
    s = _as_spec(spec)
    alphabet = list(alphabet or _default_alphabet(var, end=False))
    m = marker(var)

    def label(bit: bool) -> list[str]:
        return ["1" if bit else "0", m]

    return tr.trace_from_names([[]] + [label(b) for b in s.prefix], [label(b) for b in s.loop], alphabet)


# ---------------------------------------------------------------- arithmetic to team formulas


def _nonempty(f: Formula) -> Formula:
    return fm.And(f, fm.BNeg(fm.Bot()))


class _RhoTranslator:
    def __init__(self, varmap: Mapping[str, VarKind]):
        self.varmap = varmap

    def m(self, v: str) -> Formula:
        if v not in self.varmap:
            raise ReductionError(f"variable {v} is not bound in the prefix")
        return fm.Prop(marker(v))

    def atom(self, f: AFormula) -> Formula:
        P = fm.Prop
        if isinstance(f, Lt):
            x1, x2 = f.a.name, f.b.name
            return fm.Future(fm.And(fm.Hook(self.m(x1), P(END)), fm.Hook(self.m(x2), _nonempty(P("1")))))
        if isinstance(f, Rel):
            A = f.name
            parts = [
                fm.Future(fm.And(fm.Hook(self.m(x.name), _nonempty(P("1"))), fm.Hook(self.m(A), P(digit(1, j + 1)))))
                for j, x in enumerate(f.args)
            ]
            return fm.CondSingEx(fm.Future(self.m(A)), fm.conj(parts))
        if isinstance(f, HO):
            a, A = f.name, f.args[0]
            return fm.CondSingEx(
                fm.Future(self.m(a)),
                fm.Globally(fm.BIff(fm.Hook(self.m(a), P("1")), fm.Hook(self.m(A), P("1")))),
            )
        raise ReductionError(f"atom {f} is outside the normal form")

    def matrix(self, f: AFormula) -> Formula:
        if isinstance(f, (Lt, Rel, HO)):
            return self.atom(f)
        if isinstance(f, Const):
            return fm.Top() if f.value else fm.BNeg(fm.Top())
        if isinstance(f, Not):
            return fm.BNeg(self.matrix(f.a))
        if isinstance(f, Conj):
            return fm.conj(self.matrix(c) for c in f.items)
        if isinstance(f, Disj):
            return fm.bool_disj(self.matrix(c) for c in f.items)
        if isinstance(f, Implies):
            return fm.BImp(self.matrix(f.a), self.matrix(f.b))
        if isinstance(f, Iff):
            return fm.BIff(self.matrix(f.a), self.matrix(f.b))
        raise ReductionError(f"unexpected construct {type(f).__name__} in the matrix")

    def exists(self, v: str, body: Formula) -> Formula:
        kind = self.varmap[v]
        Fm = fm.Future(self.m(v))
        Fend = fm.Future(fm.Prop(END))
        if kind == FIRST_ORDER:
            return fm.CondSingEx(Fm, fm.And(fm.Hook(Fm, Fend), body))
        if kind == SECOND_ORDER_UNARY:
            return fm.CondSingEx(Fm, body)
        if kind == THIRD_ORDER_UNARY:
            return fm.CondSubEx(Fm, body)
        return fm.CondSubEx(Fm, fm.And(fm.Hook(Fm, fm.Neg(fm.Neg(Fend))), body))


def translate_rho(psi: AFormula) -> Formula:
    """Team formula true in the team of the merged structure iff psi is true.

    Universal quantifiers are read as not-exists-not.
    """
    problems = shape_violations(psi)
    if problems:
        raise ReductionError("not in normal form: " + "; ".join(problems))
    prefix, matrix = split_prefix(psi)
    t = _RhoTranslator({v: kind_of(ty) for _, v, ty in prefix})
    out = t.matrix(matrix)
    for q, v, _ in reversed(prefix):
        out = t.exists(v, out) if q is Exists else fm.BNeg(t.exists(v, fm.BNeg(out)))
    return out


def translate_atom(f: AFormula, varmap: Mapping[str, VarKind]) -> Formula:
    """Translation of a single atom under the given variable kinds."""
    return _RhoTranslator(varmap).atom(f)


def arith_to_mc(psi: AFormula) -> tuple[Kripke, Formula, dict[str, VarKind]]:
    """Normalize a closed sentence, then build its structure and team formula."""
    from .arith import normalize_arity

    n = normalize_arity(psi) if shape_violations(psi) else psi
    K, varmap = assemble_K_phi(n)
    return K, translate_rho(n), varmap


MAX_UNIVERSE_BOUND = 12


def build_bounded_universe(psi: AFormula, bound: int) -> Team:
    """Encodings of every number below bound (plus the stuck trace) and every
    subset of [0, bound) for each first-order and unary second-order variable."""
    if not 1 <= bound <= MAX_UNIVERSE_BOUND:
        raise ReductionError(f"bound must lie in [1, {MAX_UNIVERSE_BOUND}]")
    K, varmap = assemble_K_phi(psi)
    alphabet = list(K.alphabet)
    traces: list[LassoTrace] = []
    for v, kind in varmap.items():
        if kind == FIRST_ORDER:
            traces += [encode_number(n, v, alphabet) for n in range(bound)]
            traces.append(encode_stuck(v, alphabet))
        elif kind == SECOND_ORDER_UNARY:
            for mask in range(1 << bound):
                traces.append(encode_set([n for n in range(bound) if mask >> n & 1], v, alphabet))
        else:
            raise ReductionError(f"bounded universes support first-order and unary set variables, not {kind}")
    return Team(alphabet, traces)


# ---------------------------------------------------------------- model checking to satisfiability

MODES = ("withX", "xFree", "ulcXFree", "finiteUlc")
XP, YP = "@xp", "@yp"


def _P(p: str) -> Formula:
    return fm.Prop(p)


def _implies(a: Formula, b: Formula) -> Formula:
    return fm.implies(a, b)


def _big_or(items: Iterable[Formula]) -> Formula:
    return fm.split_disj(items)


@dataclass(frozen=True)
class Setting:
    """Propositions of a model-checking-to-satisfiability instance."""

    phi_props: tuple[str, ...]
    x: str
    y: str
    xp: str = XP
    yp: str = YP

    @property
    def props(self) -> tuple[str, ...]:
        return self.phi_props


def chi_body(K: Kripke, props: Sequence[str], with_next: bool = True,
             lit: Callable[[str], Formula] = _P) -> Formula:
    """p_r & G (OR over states of the state clause), negating every other proposition in props."""
    succ = K.successors()
    clauses = []
    for w in range(K.n):
        names = set(K.label_names(w))
        parts = [lit(state_prop(w))]
        parts += [fm.Neg(lit(state_prop(v))) for v in range(K.n) if v != w]
        parts += [lit(q) for q in props if q in names and q != state_prop(w)]
        parts += [fm.Neg(lit(q)) for q in props if q not in names and not q.startswith("@pw_")]
        if with_next:
            parts.append(_big_or(fm.Next(lit(state_prop(v))) for v in succ[w]))
        clauses.append(fm.conj(parts))
    return fm.And(lit(state_prop(K.root)), fm.Globally(_big_or(clauses)))


def _hash() -> Formula:
    return _P(HASH)


def _Fh() -> Formula:
    return fm.Future(_hash())


def _nFh() -> Formula:
    return fm.Neg(fm.Future(_hash()))


def xi_sub_proto(props: Sequence[str], x_free: bool = False, lit: Callable[[str], Formula] = _P,
                 special: Callable[[str], Formula] | None = None) -> Formula:
    """Every trace is a prototrace: one proposition, then # forever."""
    h = _hash()
    branches = []
    for p in props:
        parts = [fm.Future(lit(p))]
        parts += [fm.Globally(fm.Neg(lit(q))) for q in props if q != p]
        if special is not None:
            parts.append(special(p))
        elif x_free:
            parts.append(fm.Globally(_implies(lit(p), fm.And(fm.Future(h), fm.Globally(fm.SplitOr(lit(p), h))))))
        else:
            parts.append(fm.Globally(_implies(lit(p), fm.Next(h))))
        parts.append(fm.Globally(_implies(h, fm.And(fm.Neg(lit(p)), fm.Globally(h)))))
        branches.append(fm.conj(parts))
    return fm.Neg(fm.Neg(_big_or(branches)))


def xi_sup_proto(props: Sequence[str], lit: Callable[[str], Formula] = _P) -> Formula:
    """Every proposition appears on some trace at every position."""
    return fm.conj(fm.Globally(fm.SingEx(lit(p))) for p in props)


def union_clause(props: Sequence[str], lit: Callable[[str], Formula] = _P) -> Formula:
    """Some regular trace is the position-wise union of the selected prototraces."""
    body = fm.conj(
        fm.Globally(fm.BIff(fm.Hook(_nFh(), fm.Neg(lit(p))), fm.Hook(_Fh(), fm.Neg(lit(p))))) for p in props
    )
    return fm.CondSingEx(_nFh(), body)


def alpha(props: Sequence[str]) -> Formula:
    return fm.conj(fm.SplitOr(fm.Future(fm.Globally(_P(p))), fm.Future(fm.Globally(fm.Neg(_P(p))))) for p in props)


def alpha_prime(props: Sequence[str]) -> Formula:
    body = fm.conj(
        fm.BOr(fm.Future(fm.Globally(fm.Neg(_P(p)))), fm.Future(fm.Globally(fm.BNeg(fm.Neg(_P(p)))))) for p in props
    )
    return fm.Hook(_Fh(), body)


def xi_formula(props: Sequence[str], x_free: bool = False, ulc: bool = False,
               lit: Callable[[str], Formula] = _P, special: Callable[[str], Formula] | None = None) -> Formula:
    """Defines the full team plus all prototraces (up to stuttering when x_free)."""
    proto = fm.And(xi_sub_proto(props, x_free, lit, special), xi_sup_proto(props, lit))
    unions = union_clause(props, lit)
    if ulc:
        unions = fm.BImp(alpha_prime(props), unions)
    return fm.And(fm.Hook(_Fh(), proto), fm.CondSubAll(_Fh(), unions))


def psi_stutter(props: Sequence[str], lit: Callable[[str], Formula] = _P) -> Formula:
    h = _hash()
    any_p = _big_or(lit(p) for p in props)
    same_steps = fm.Globally(fm.BOr(fm.BOr(fm.And(fm.Neg(h), fm.Neg(any_p)), h), any_p))
    s1 = fm.CondSubAll(_Fh(), fm.Hook(_Fh(), fm.BImp(fm.Future(any_p), same_steps)))
    parts = []
    for p in props:
        for ell in (lit(p), fm.Neg(lit(p))):
            for q in props:
                both = fm.And(fm.Hook(_Fh(), lit(q)), fm.Hook(_nFh(), ell))
                parts.append(fm.BImp(
                    fm.Future(both),
                    fm.Globally(fm.BImp(fm.Hook(_Fh(), lit(q)), fm.Hook(_nFh(), ell))),
                ))
    s2 = fm.CondSingAll(_Fh(), fm.CondSingAll(_nFh(), fm.conj(parts)))
    return fm.And(s1, s2)


def zeta(K: Kripke, x: str, y: str, lit: Callable[[str], Formula] = _P) -> Formula:
    """Every regular trace moves along edges, read off two helper prototraces."""
    h = _hash()
    X, Y = lit(x), lit(y)
    z1 = fm.Hook(_Fh(), fm.Globally(fm.conj([
        fm.BNeg(fm.SplitOr(X, Y)),
        fm.BNeg(fm.SplitOr(h, X)),
        fm.BNeg(fm.SplitOr(h, fm.conj([fm.Neg(X), fm.Neg(Y), fm.Neg(h)]))),
    ])))
    z2 = fm.bool_disj(
        fm.And(
            fm.Globally(fm.BOr(fm.Hook(_Fh(), fm.Neg(X)), fm.Hook(_nFh(), lit(state_prop(w))))),
            fm.Globally(fm.BOr(fm.Hook(_Fh(), fm.Neg(Y)), fm.Hook(_nFh(), lit(state_prop(v))))),
        )
        for w, v in sorted(K.edges)
    )
    guard_x = fm.And(_Fh(), fm.Future(X))
    guard_y = fm.And(_Fh(), fm.Future(Y))
    return fm.CondSingAll(_nFh(), fm.CondSingAll(guard_x, fm.CondSingAll(guard_y, fm.BImp(z1, z2))))


def chi_prime(K: Kripke, props: Sequence[str], x: str, y: str, lit: Callable[[str], Formula] = _P) -> Formula:
    local = chi_body(K, props, with_next=False, lit=lit)
    return fm.And(fm.Hook(_nFh(), fm.Neg(fm.Neg(local))), zeta(K, x, y, lit))


def mc_to_truth(phi: Formula, K: Kripke, props: Sequence[str], x: str, y: str, xp: str, yp: str,
                lit: Callable[[str], Formula] = _P) -> Formula:
    """Two-branch split: T(K) with helpers x, y on the left, everything else with x', y' on the right."""
    left = fm.conj([
        fm.Hook(_Fh(), fm.Globally(fm.And(fm.Neg(lit(xp)), fm.Neg(lit(yp))))),
        chi_prime(K, props, x, y, lit),
        fm.Hook(_nFh(), phi),
    ])
    right = fm.And(
        fm.Hook(_Fh(), fm.Globally(fm.And(fm.Neg(lit(x)), fm.Neg(lit(y))))),
        fm.BNeg(chi_prime(K, props, xp, yp, lit)),
    )
    return fm.SplitOr(left, right)


def psi_root(props: Sequence[str]) -> Formula:
    r = _P(ROOT)
    quiet = fm.conj([r, fm.Neg(_hash())] + [fm.And(fm.Neg(_P(p)), fm.Neg(_P(delayed(p)))) for p in props])
    return fm.conj([r, fm.Future(fm.Neg(r)), fm.Globally(fm.BOr(quiet, fm.Globally(fm.Neg(r))))])


def delayed(p: str) -> str:
    """The proposition standing for p at the first position under a root prefix."""
    return "@lp" + p.lstrip("@")


def _check_distinct_labels(K: Kripke) -> None:
    seen: dict[int, int] = {}
    for w, lab in enumerate(K.labels):
        if lab in seen:
            raise ReductionError(f"states {seen[lab]} and {w} share a label; ultimately constant modes need distinct labels")
        seen[lab] = w


def mc2sat_setting(phi: Formula, K: Kripke, mode: str) -> tuple[Kripke, list[str], str, str]:
    """Augmented structure, proposition universe and helper propositions x, y."""
    K2, _ = chi_formula(K)
    props = list(K2.alphabet) + sorted(fm.props(phi) - set(K2.alphabet))
    if len(props) < 2:
        raise ReductionError("the reduction needs at least two propositions")
    x, y = props[0], props[1]
    if mode != "withX":
        clash = {XP, YP, HASH, ROOT} & set(props)
        if clash:
            raise ReductionError(f"reserved propositions already used: {sorted(clash)}")
        props += [XP, YP]
    return K2, props, x, y


def mc2sat(phi: Formula, K: Kripke, mode: str) -> Formula:
    """Formula satisfiable (in the mode's sense) iff T(K) satisfies phi."""
    if mode not in MODES:
        raise ReductionError(f"unknown mode {mode!r}; choose one of {', '.join(MODES)}")
    if HASH in fm.props(phi):
        raise ReductionError(f"{HASH} is reserved for prototraces")
    if mode != "withX":
        if any(n.kind in (fm.Kind.NEXT, fm.Kind.UNTIL, fm.Kind.RELEASE) for n in fm.iter_nodes(fm.desugar(phi))):
            raise FragmentViolation("X-free modes accept formulas with F and G only")
        limit = 1 if mode == "finiteUlc" else 2
        if fm.temporal_depth(fm.desugar(phi)) > limit:
            raise FragmentViolation(f"{mode} needs temporal depth at most {limit}")
    if mode in ("ulcXFree", "finiteUlc"):
        _check_distinct_labels(K)
    K2, props, x, y = mc2sat_setting(phi, K, mode)

    if mode == "withX":
        chi = chi_body(K2, props, with_next=True)
        return fm.And(xi_formula(props), fm.Hook(chi, phi))

    if mode == "xFree":
        return fm.conj([xi_formula(props, x_free=True), psi_stutter(props),
                        mc_to_truth(phi, K2, props, x, y, XP, YP)])

    if mode == "ulcXFree":
        return fm.conj([xi_formula(props, x_free=True, ulc=True), psi_stutter(props),
                        fm.Neg(fm.Neg(alpha(props))), mc_to_truth(phi, K2, props, x, y, XP, YP)])

    # finiteUlc: delay the first position behind a root prefix
    clash = {delayed(p) for p in props} & set(props)
    if clash or ROOT in props:
        raise ReductionError("delayed propositions collide with the input")
    r = _P(ROOT)

    def lit(p: str) -> Formula:
        return fm.BOr(_P(p), fm.And(r, fm.Neg(fm.Neg(fm.Future(_P(delayed(p)))))))

    def special(p: str) -> Formula:
        trigger = fm.SplitOr(_P(p), fm.Future(_P(delayed(p))))
        rest = fm.And(fm.Future(_hash()), fm.Globally(fm.SplitOr(fm.SplitOr(r, _P(p)), _hash())))
        return fm.Globally(_implies(trigger, rest))

    phi_d = fm.substitute_props(phi, {p: lit(p) for p in fm.props(phi)})
    return fm.conj([
        xi_formula(props, x_free=True, ulc=True, lit=lit, special=special),
        psi_stutter(props, lit),
        fm.Neg(fm.Neg(alpha(props))),
        mc_to_truth(phi_d, K2, props, x, y, XP, YP, lit),
        psi_root(props),
    ])


MAX_ROOT_PROPS = 3


def root_gadget(props: Sequence[str]) -> Kripke:
    """Finite structure for the delayed full team with prototraces.

    A root labeled @root leads into a clique of one state per label over the
    propositions and their delayed copies, and into the prototrace path
    (empty label cycling, then one proposition, then # forever).
    """
    props = list(props)
    if len(props) > MAX_ROOT_PROPS:
        raise ReductionError(f"root gadget limited to {MAX_ROOT_PROPS} propositions")
    letters = props + [delayed(p) for p in props]
    alphabet = [ROOT, HASH] + letters
    labels: list[frozenset[str]] = [frozenset({ROOT})]
    clique = []
    for mask in range(1 << len(letters)):
        clique.append(len(labels))
        labels.append(frozenset(l for i, l in enumerate(letters) if mask >> i & 1))
    empty = len(labels)
    labels.append(frozenset())
    singles = {}
    for p in props:
        singles[p] = len(labels)
        labels.append(frozenset({p}))
    hash_state = len(labels)
    labels.append(frozenset({HASH}))
    edges = {(0, c) for c in clique} | {(a, b) for a in clique for b in clique}
    edges |= {(0, empty), (empty, empty), (hash_state, hash_state)}
    for s in singles.values():
        edges |= {(0, s), (empty, s), (s, hash_state)}
    return Kripke(tuple(alphabet), tuple(tr.label_of(l, alphabet) for l in labels), frozenset(edges), 0)
