"""Seeded random generators for traces, teams, formulas and structures."""
from __future__ import annotations

import random
from typing import Iterator, Sequence

from . import formula as fm
from .formula import Formula, Kind
from .team import Team
from .trace import LassoTrace, lasso

PURE_LTL = (Kind.NEG, Kind.AND, Kind.SPLIT_OR, Kind.NEXT, Kind.FUTURE, Kind.GLOBALLY, Kind.UNTIL, Kind.RELEASE)
PURE_X_FREE = tuple(k for k in PURE_LTL if k is not Kind.NEXT)
TILDE_FREE = PURE_LTL + (Kind.TOP, Kind.BOT, Kind.DEP, Kind.HOOK, Kind.SUB_EX, Kind.COND_SUB_EX)
SUGAR = (
    Kind.BOR, Kind.BIMP, Kind.BIFF, Kind.HOOK, Kind.SUB_EX, Kind.SUB_ALL, Kind.SING_EX, Kind.SING_ALL,
    Kind.COND_SUB_EX, Kind.COND_SUB_ALL, Kind.COND_SING_EX, Kind.COND_SING_ALL, Kind.DEP,
)
FULL = PURE_LTL + (Kind.BNEG, Kind.TOP, Kind.BOT) + SUGAR
FULL_X_FREE = tuple(k for k in FULL if k is not Kind.NEXT)

_UNARY = {
    Kind.NEG: fm.Neg, Kind.BNEG: fm.BNeg, Kind.NEXT: fm.Next, Kind.FUTURE: fm.Future,
    Kind.GLOBALLY: fm.Globally, Kind.SUB_EX: fm.SubEx, Kind.SUB_ALL: fm.SubAll,
    Kind.SING_EX: fm.SingEx, Kind.SING_ALL: fm.SingAll,
}
_BINARY = {
    Kind.AND: fm.And, Kind.SPLIT_OR: fm.SplitOr, Kind.UNTIL: fm.Until, Kind.RELEASE: fm.Release,
    Kind.BOR: fm.BOr, Kind.BIMP: fm.BImp, Kind.BIFF: fm.BIff, Kind.HOOK: fm.Hook,
    Kind.COND_SUB_EX: fm.CondSubEx, Kind.COND_SUB_ALL: fm.CondSubAll,
    Kind.COND_SING_EX: fm.CondSingEx, Kind.COND_SING_ALL: fm.CondSingAll,
}
_CONSTANTS = {Kind.TOP: fm.Top, Kind.BOT: fm.Bot}


def random_label(rng: random.Random, nprops: int) -> int:
    return rng.getrandbits(nprops) if nprops else 0


def random_lasso(rng: random.Random, nprops: int, max_prefix: int = 3, max_loop: int = 3) -> LassoTrace:
    pre = [random_label(rng, nprops) for _ in range(rng.randint(0, max_prefix))]
    loop = [random_label(rng, nprops) for _ in range(rng.randint(1, max_loop))]
    return lasso(pre, loop)


def random_team(rng: random.Random, alphabet: Sequence[str], max_traces: int = 4,
                max_prefix: int = 3, max_loop: int = 3, min_traces: int = 0) -> Team:
    n = rng.randint(min_traces, max_traces)
    return Team(alphabet, (random_lasso(rng, len(alphabet), max_prefix, max_loop) for _ in range(n)))


def team_stream(seed: int, alphabet: Sequence[str], **kw) -> Iterator[Team]:
    """Endless seeded stream of random teams."""
    rng = random.Random(seed)
    while True:
        yield random_team(rng, alphabet, **kw)


def random_formula(rng: random.Random, props: Sequence[str], size: int = 6,
                   kinds: Sequence[Kind] = PURE_LTL, max_td: int | None = None) -> Formula:
    """Random formula with at most ``size`` connectives drawn from ``kinds``.

    Guards of conditional quantifiers and dependence arguments are small
    pure formulas over the same propositions.
    """
    kinds = tuple(kinds)
    constants = [k for k in kinds if k in _CONSTANTS]
    connectives = [k for k in kinds if k not in _CONSTANTS]

    def leaf() -> Formula:
        if constants and rng.random() < 0.15:
            return _CONSTANTS[rng.choice(constants)]()
        return fm.Prop(rng.choice(props))

    def build(budget: int, td_left: int | None) -> Formula:
        if budget <= 0 or rng.random() < 0.2:
            return leaf()
        options = [k for k in connectives if not (k in fm.TEMPORAL_KINDS and td_left == 0)]
        if not options:
            return leaf()
        k = rng.choice(options)
        td_next = td_left - 1 if (td_left is not None and k in fm.TEMPORAL_KINDS) else td_left
        if k in _UNARY:
            return _UNARY[k](build(budget - 1, td_next))
        if k is Kind.DEP:
            nargs = rng.randint(0, 2)
            args = [build(min(budget - 1, 1), td_left) for _ in range(nargs)]
            return fm.Dep(args, build(min(budget - 1, 2), td_left))
        if k in (Kind.COND_SUB_EX, Kind.COND_SUB_ALL, Kind.COND_SING_EX, Kind.COND_SING_ALL, Kind.HOOK):
            guard = build(min(budget - 1, 1), td_left)
            return _BINARY[k](guard, build(budget - 1, td_left))
        split = rng.randint(0, budget - 1)
        return _BINARY[k](build(split, td_next), build(budget - 1 - split, td_next))

    return build(size, max_td)


def random_kripke(rng: random.Random, max_states: int = 5, alphabet: Sequence[str] = ("p", "q")):
    """Random serial structure with root 0."""
    from .kripke import Kripke

    n = rng.randint(1, max_states)
    labels = [random_label(rng, len(alphabet)) for _ in range(n)]
    edges = set()
    for w in range(n):
        for v in rng.sample(range(n), rng.randint(1, min(n, 3))):
            edges.add((w, v))
    return Kripke(tuple(alphabet), tuple(labels), frozenset(edges), 0)


def random_arith(rng: random.Random, size: int = 4, max_quantifiers: int = 4):
    """Random closed arithmetic sentence over mixed-order variables.

    Quantifiers are placed anywhere, not only in front, so the result also
    exercises prenexing.  Atoms mix built-ins, function terms, relations of
    arity up to 3 and third-order atoms.
    """
    from . import arith as ar

    types = [ar.FO, ar.FO, ar.rel(1), ar.rel(2), ar.rel(3), ar.fn(1), ar.fn(2), ar.third(1), ar.third(2, 1)]
    counter = iter(range(10**6))

    def term(scope: dict, depth: int):
        fos = [v for v, t in scope.items() if t == ar.FO]
        fns = [v for v, t in scope.items() if t.function]
        roll = rng.random()
        if depth <= 0 or roll < 0.35:
            if fos and rng.random() < 0.8:
                return ar.Var(rng.choice(fos))
            return ar.One() if rng.random() < 0.5 else ar.Zero()
        if fns and roll < 0.55:
            f = rng.choice(fns)
            return ar.App(f, tuple(term(scope, depth - 1) for _ in range(scope[f].arity)))
        op = ar.Plus if rng.random() < 0.5 else ar.Times
        return op(term(scope, depth - 1), term(scope, depth - 1))

    def atom(scope: dict):
        rels = [v for v, t in scope.items() if t.order == 2 and not t.function]
        his = [v for v, t in scope.items() if t.order == 3]
        roll = rng.random()
        if his and roll < 0.2:
            a = rng.choice(his)
            args = []
            for n in scope[a].args:
                cands = [v for v, t in scope.items() if t == ar.rel(n)]
                if not cands:
                    break
                args.append(rng.choice(cands))
            if len(args) == len(scope[a].args):
                return ar.HO(a, tuple(args))
        if rels and roll < 0.55:
            A = rng.choice(rels)
            return ar.Rel(A, tuple(term(scope, 1) for _ in range(scope[A].arity)))
        cls = rng.choice([ar.Eq, ar.Lt, ar.Le])
        return cls(term(scope, 2), term(scope, 2))

    def build(scope: dict, budget: int, quants: int):
        roll = rng.random()
        if quants > 0 and roll < 0.35:
            t = rng.choice(types)
            v = f"{'x' if t == ar.FO else 'f' if t.function else 'A' if t.order == 2 else 'a'}{next(counter)}"
            q = ar.Exists if rng.random() < 0.5 else ar.Forall
            return q(v, t, build({**scope, v: t}, budget - 1, quants - 1))
        if budget <= 0 or roll < 0.55:
            return atom(scope)
        if roll < 0.65:
            return ar.Not(build(scope, budget - 1, quants))
        cls = rng.choice([ar.Conj, ar.Disj, ar.Implies, ar.Iff])
        a, b = build(scope, budget // 2, quants // 2), build(scope, budget // 2, quants - quants // 2)
        return cls((a, b)) if cls in (ar.Conj, ar.Disj) else cls(a, b)

    x = f"x{next(counter)}"
    return ar.Exists(x, ar.FO, build({x: ar.FO}, size, max_quantifiers))
