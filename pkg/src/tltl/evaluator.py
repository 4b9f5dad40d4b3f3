"""Exact synchronous team semantics over finite lasso teams.

Subteams are bitmasks over the base team.  At every canonical shift s the
pair (s, mask) determines the suffix team, so results are memoized on
(node uid, s, mask).  Temporal searches visit each reachable canonical shift
once: beyond P the suffix teams repeat with period L, and the least witness
of an Until (or least violation of a Release) is met before any shift repeats.
"""
from __future__ import annotations

import os
import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from . import trace as tr
from .errors import BudgetExceeded, NonClassicalFormula, UnknownProposition
from .formula import Formula, Kind, downward_closed_syntactically, iter_nodes, props
from .team import Team, team_suffix
from .trace import LassoTrace

DEFAULT_BUDGET = 10**8

if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)


def default_budget() -> int:
    env = os.environ.get("TLTL_BUDGET")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"TLTL_BUDGET must be an integer, got {env!r}") from None
        if value > 0:
            return value
    return DEFAULT_BUDGET


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """All submasks in ascending numeric order."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


@dataclass
class EvalStats:
    evaluations: int = 0
    memo_hits: int = 0
    split_nodes: int = 0
    splits_tried: int = 0

    def as_lines(self) -> list[str]:
        return [f"{k}={v}" for k, v in self.__dict__.items()]


class EvalContext:
    """Evaluation state for one base team.

    full_split disables the 2-partition shortcut for split disjunction;
    split_order is "ascending", "descending" or "shuffled" (seeded by rng).
    """

    def __init__(self, team: Team, budget: int | None = None, full_split: bool = False,
                 split_order: str = "ascending", rng: random.Random | None = None):
        self.team = team
        self.h = team.horizon()
        self.n = len(team)
        self.budget = default_budget() if budget is None else budget
        self.full_split = full_split
        self.split_order = split_order
        self.rng = rng or random.Random(0)
        self.memo: dict[tuple[int, int, int], bool] = {}
        self.stats = EvalStats()
        self._prop_index = {p: i for i, p in enumerate(team.alphabet)}
        self._labels: dict[int, list[int]] = {}
        self._propmask: dict[tuple[int, int], int] = {}
        self._reps: dict[int, list[int] | None] = {}
        self._reach: dict[int, list[int]] = {}
        self._dc: dict[int, bool] = {}

    # -------------------------------------------------------------- public

    def check(self, phi: Formula, shift: int = 0, mask: int | None = None) -> bool:
        missing = props(phi) - set(self.team.alphabet)
        if missing:
            raise UnknownProposition(f"propositions not in team alphabet: {sorted(missing)}")
        if mask is None:
            mask = self.team.full_mask()
        return self._eval(phi, self.h.canonical_shift(shift), mask)

    def condition(self, gamma: Formula, shift: int, mask: int) -> int:
        """Mask of traces in ``mask`` whose singleton satisfies gamma."""
        s = self.h.canonical_shift(shift)
        mask = self._canon(s, mask)
        return self._condition(gamma, s, mask)

    # -------------------------------------------------------------- shift data

    def _labels_at(self, s: int) -> list[int]:
        lab = self._labels.get(s)
        if lab is None:
            lab = [tr.at(t, s) for t in self.team.traces]
            self._labels[s] = lab
        return lab

    def _prop_mask(self, s: int, p: int) -> int:
        key = (s, p)
        m = self._propmask.get(key)
        if m is None:
            m = 0
            for i, a in enumerate(self._labels_at(s)):
                if a >> p & 1:
                    m |= 1 << i
            self._propmask[key] = m
        return m

    def _canon(self, s: int, mask: int) -> int:
        """Map every trace to the least index with the same suffix at s."""
        if s not in self._reps:
            seen: dict[LassoTrace, int] = {}
            reps = []
            for i, t in enumerate(self.team.traces):
                reps.append(seen.setdefault(tr.suffix(t, s), i))
            self._reps[s] = None if len(seen) == self.n else reps
        reps = self._reps[s]
        if reps is None:
            return mask
        out = 0
        for i in bits(mask):
            out |= 1 << reps[i]
        return out

    def _reachable(self, s: int) -> list[int]:
        r = self._reach.get(s)
        if r is None:
            P, H = self.h.P, self.h.H
            if s < P:
                r = list(range(s, H))
            else:
                r = list(range(s, H)) + list(range(P, s))
            self._reach[s] = r
        return r

    def _is_dc(self, node: Formula) -> bool:
        v = self._dc.get(node.uid)
        if v is None:
            v = downward_closed_syntactically(node)
            self._dc[node.uid] = v
        return v

    # -------------------------------------------------------------- core

    def _eval(self, node: Formula, s: int, mask: int) -> bool:
        mask = self._canon(s, mask)
        key = (node.uid, s, mask)
        memo = self.memo
        if key in memo:
            self.stats.memo_hits += 1
            return memo[key]
        self.stats.evaluations += 1
        if self.stats.evaluations > self.budget:
            raise BudgetExceeded(f"evaluation budget of {self.budget} states exceeded")
        value = self._dispatch(node, s, mask)
        memo[key] = value
        return value

    def _single(self, node: Formula, s: int, i: int) -> bool:
        return self._eval(node, s, 1 << i)

    def _condition(self, gamma: Formula, s: int, mask: int) -> int:
        out = 0
        for i in bits(mask):
            if self._single(gamma, s, i):
                out |= 1 << i
        return out

    def _ordered(self, mask: int) -> Iterable[int]:
        if self.split_order == "ascending":
            return submasks(mask)
        subs = list(submasks(mask))
        if self.split_order == "descending":
            subs.reverse()
        else:
            self.rng.shuffle(subs)
        return subs

    def _dispatch(self, node: Formula, s: int, mask: int) -> bool:
        K = node.kind
        ev = self._eval
        c = node.children

        if K is Kind.PROP:
            p = self._prop_index.get(node.name)
            if p is None:
                raise UnknownProposition(node.name)
            return mask & ~self._prop_mask(s, p) == 0
        if K is Kind.TOP:
            return True
        if K is Kind.BOT:
            return mask == 0
        if K is Kind.NEG:
            return not any(self._single(c[0], s, i) for i in bits(mask))
        if K is Kind.AND:
            return ev(c[0], s, mask) and ev(c[1], s, mask)
        if K is Kind.BNEG:
            return not ev(c[0], s, mask)
        if K is Kind.SPLIT_OR:
            return self._split(c[0], c[1], s, mask)
        if K is Kind.NEXT:
            return ev(c[0], self.h.next_shift(s), mask)
        if K is Kind.FUTURE:
            return any(ev(c[0], k, mask) for k in self._reachable(s))
        if K is Kind.GLOBALLY:
            return all(ev(c[0], k, mask) for k in self._reachable(s))
        if K is Kind.UNTIL:
            for k in self._reachable(s):
                if ev(c[1], k, mask):
                    return True
                if not ev(c[0], k, mask):
                    return False
            return False
        if K is Kind.RELEASE:
            for k in self._reachable(s):
                if not ev(c[1], k, mask):
                    return False
                if ev(c[0], k, mask):
                    return True
            return True
        if K is Kind.DEP:
            seen: dict[tuple[bool, ...], bool] = {}
            for i in bits(mask):
                key = tuple(self._single(a, s, i) for a in c[:-1])
                val = self._single(c[-1], s, i)
                if seen.setdefault(key, val) != val:
                    return False
            return True
        if K is Kind.BOR:
            return ev(c[0], s, mask) or ev(c[1], s, mask)
        if K is Kind.BIMP:
            return (not ev(c[0], s, mask)) or ev(c[1], s, mask)
        if K is Kind.BIFF:
            return ev(c[0], s, mask) == ev(c[1], s, mask)
        if K is Kind.HOOK:
            return ev(c[1], s, self._condition(c[0], s, mask))
        if K is Kind.SUB_EX:
            return any(ev(c[0], s, sub) for sub in submasks(mask))
        if K is Kind.SUB_ALL:
            return all(ev(c[0], s, sub) for sub in submasks(mask))
        if K is Kind.SING_EX:
            return any(self._single(c[0], s, i) for i in bits(mask))
        if K is Kind.SING_ALL:
            return all(self._single(c[0], s, i) for i in bits(mask))
        if K in (Kind.COND_SUB_EX, Kind.COND_SUB_ALL, Kind.COND_SING_EX, Kind.COND_SING_ALL):
            inside = self._condition(c[0], s, mask)
            rest = mask & ~inside
            if K is Kind.COND_SUB_EX:
                return any(ev(c[1], s, rest | sub) for sub in submasks(inside))
            if K is Kind.COND_SUB_ALL:
                return all(ev(c[1], s, rest | sub) for sub in submasks(inside))
            if K is Kind.COND_SING_EX:
                return any(ev(c[1], s, rest | 1 << i) for i in bits(inside))
            return all(ev(c[1], s, rest | 1 << i) for i in bits(inside))
        raise AssertionError(K)

    def _split(self, left: Formula, right: Formula, s: int, mask: int) -> bool:
        self.stats.split_nodes += 1
        ev = self._eval
        exact = not self.full_split and (self._is_dc(left) or self._is_dc(right))
        for sub in self._ordered(mask):
            self.stats.splits_tried += 1
            rest = mask & ~sub
            if exact:
                if ev(left, s, sub) and ev(right, s, rest):
                    return True
                continue
            if not ev(left, s, sub):
                continue
            # the right part must cover rest and may share any part of sub
            for extra in submasks(sub):
                if ev(right, s, rest | extra):
                    return True
        return False


def check(team: Team, phi: Formula, budget: int | None = None, **kw) -> bool:
    return EvalContext(team, budget=budget, **kw).check(phi)


# ---------------------------------------------------------------- classical oracle

def check_classical(t: LassoTrace, phi: Formula, alphabet: list[str] | tuple[str, ...]) -> bool:
    """Classical truth of a pure LTL formula on one lasso.

    Works on the positions 0..|prefix|+|loop|-1 of the stored lasso, with
    fixpoints on the loop computed by two backward passes.
    """
    for n in iter_nodes(phi):
        if n.kind not in _CLASSICAL_KINDS:
            raise NonClassicalFormula(f"{n.kind.value} is not a classical LTL connective")
    index = {p: i for i, p in enumerate(alphabet)}
    word = list(t.prefix) + list(t.loop)
    n = len(word)
    start = len(t.prefix)
    succ = list(range(1, n)) + [start]
    memo: dict[int, list[bool]] = {}

    def backward(step: Callable[[int, bool], bool], init: bool) -> list[bool]:
        res = [init] * n
        nxt = init
        for _ in range(2):
            for i in range(n - 1, start - 1, -1):
                nxt = step(i, nxt)
                res[i] = nxt
        for i in range(start - 1, -1, -1):
            nxt = step(i, nxt)
            res[i] = nxt
        return res

    for node in iter_nodes(phi):
        K = node.kind
        v = [memo[c.uid] for c in node.children]
        if K is Kind.PROP:
            if node.name not in index:
                raise UnknownProposition(node.name)
            b = index[node.name]
            out = [bool(a >> b & 1) for a in word]
        elif K is Kind.TOP:
            out = [True] * n
        elif K is Kind.BOT:
            out = [False] * n
        elif K is Kind.NEG:
            out = [not x for x in v[0]]
        elif K is Kind.AND:
            out = [x and y for x, y in zip(v[0], v[1])]
        elif K is Kind.SPLIT_OR:
            out = [x or y for x, y in zip(v[0], v[1])]
        elif K is Kind.NEXT:
            out = [v[0][succ[i]] for i in range(n)]
        elif K is Kind.FUTURE:
            a = v[0]
            out = backward(lambda i, nx: a[i] or nx, False)
        elif K is Kind.GLOBALLY:
            a = v[0]
            out = backward(lambda i, nx: a[i] and nx, True)
        elif K is Kind.UNTIL:
            a, b = v
            out = backward(lambda i, nx: b[i] or (a[i] and nx), False)
        elif K is Kind.RELEASE:
            a, b = v
            out = backward(lambda i, nx: b[i] and (a[i] or nx), True)
        else:
            raise AssertionError(K)
        memo[node.uid] = out
    return memo[phi.uid][0]


def _require_classical(phi: Formula) -> None:
    for n in iter_nodes(phi):
        if n.kind not in _CLASSICAL_KINDS:
            raise NonClassicalFormula(f"{n.kind.value} is not a classical LTL connective")


def check_classical_shape(words: Sequence[Sequence[int]], prefix_len: int, phi: Formula,
                          alphabet: Sequence[str]) -> list[bool]:
    """Classical truth on the lassos words[j][:prefix_len] (words[j][prefix_len:])^w, all of one length."""
    _require_classical(phi)
    if not words:
        return []
    n = len(words[0])
    if not 0 <= prefix_len < n or any(len(w) != n for w in words):
        raise ValueError("all words need the same length, longer than the prefix")
    truth = _classical_bits(phi, words, prefix_len, n, {p: i for i, p in enumerate(alphabet)})
    bits = bin(truth)[2:][::-1].ljust(len(words), "0")
    return [c == "1" for c in bits[: len(words)]]


def check_classical_many(traces: Iterable[LassoTrace], phi: Formula,
                         alphabet: list[str] | tuple[str, ...]) -> list[bool]:
    """check_classical on many lassos at once.

    Lassos of equal shape share positions and successors, so each position
    holds one integer whose bit j is the value on the j-th lasso of the shape.
    """
    _require_classical(phi)
    traces = list(traces)
    groups: dict[tuple[int, int], list[int]] = {}
    for j, t in enumerate(traces):
        groups.setdefault((len(t.prefix), len(t.loop)), []).append(j)
    result = [False] * len(traces)
    for (start, _), members in groups.items():
        words = [traces[j].prefix + traces[j].loop for j in members]
        for j, value in zip(members, check_classical_shape(words, start, phi, alphabet)):
            result[j] = value
    return result


def _classical_bits(phi: Formula, words: list[tuple[int, ...]], start: int, n: int,
                    index: dict[str, int]) -> int:
    full = (1 << len(words)) - 1
    succ = list(range(1, n)) + [start]
    memo: dict[int, list[int]] = {}

    def backward(step: Callable[[int, int], int], init: int) -> list[int]:
        res = [init] * n
        nxt = init
        for _ in range(2):
            for i in range(n - 1, start - 1, -1):
                nxt = step(i, nxt)
                res[i] = nxt
        for i in range(start - 1, -1, -1):
            nxt = step(i, nxt)
            res[i] = nxt
        return res

    # position i as a column over the lassos, last lasso first, so that a
    # 0/1 string of one proposition reads as the bitmask in base 2
    columns = [[w[i] for w in reversed(words)] for i in range(n)]
    small = max(max(w) for w in words) < 256
    if small:
        columns = [bytes(col) for col in columns]

    def prop_masks(b: int) -> list[int]:
        if small:
            table = bytes(49 if lab >> b & 1 else 48 for lab in range(256))
            return [int(col.translate(table), 2) if col else 0 for col in columns]
        return [int("".join("1" if lab >> b & 1 else "0" for lab in col) or "0", 2) for col in columns]

    for node in iter_nodes(phi):
        K = node.kind
        v = [memo[c.uid] for c in node.children]
        if K is Kind.PROP:
            if node.name not in index:
                raise UnknownProposition(node.name)
            out = prop_masks(index[node.name])
        elif K is Kind.TOP:
            out = [full] * n
        elif K is Kind.BOT:
            out = [0] * n
        elif K is Kind.NEG:
            out = [full & ~x for x in v[0]]
        elif K is Kind.AND:
            out = [x & y for x, y in zip(v[0], v[1])]
        elif K is Kind.SPLIT_OR:
            out = [x | y for x, y in zip(v[0], v[1])]
        elif K is Kind.NEXT:
            out = [v[0][succ[i]] for i in range(n)]
        elif K is Kind.FUTURE:
            a = v[0]
            out = backward(lambda i, nx: a[i] | nx, 0)
        elif K is Kind.GLOBALLY:
            a = v[0]
            out = backward(lambda i, nx: a[i] & nx, full)
        elif K is Kind.UNTIL:
            a, b = v
            out = backward(lambda i, nx: b[i] | (a[i] & nx), 0)
        elif K is Kind.RELEASE:
            a, b = v
            out = backward(lambda i, nx: b[i] & (a[i] | nx), full)
        else:
            raise AssertionError(K)
        memo[node.uid] = out
    return memo[phi.uid][0]


_CLASSICAL_KINDS = frozenset(
    {Kind.PROP, Kind.TOP, Kind.BOT, Kind.NEG, Kind.AND, Kind.SPLIT_OR,
     Kind.NEXT, Kind.FUTURE, Kind.GLOBALLY, Kind.UNTIL, Kind.RELEASE}
)


# ---------------------------------------------------------------- probes

@dataclass
class ProbeResult:
    """Outcome of a property probe.

    status is "counterexample", "none_found" (the sampler ran dry, so the
    search was exhaustive over it) or "budget_exhausted" (sample budget used up).
    """

    status: str
    samples: int
    counterexample: tuple | None = field(default=None)

    @property
    def found(self) -> bool:
        return self.status == "counterexample"


def _probe(sampler: Iterable[Team], budget: int, test: Callable[[Team], tuple | None]) -> ProbeResult:
    count = 0
    for team in sampler:
        if count >= budget:
            return ProbeResult("budget_exhausted", count)
        count += 1
        cex = test(team)
        if cex is not None:
            return ProbeResult("counterexample", count, cex)
    return ProbeResult("none_found", count)


def _truth_table(team: Team, phi: Formula) -> dict[int, bool]:
    ctx = EvalContext(team)
    return {m: ctx.check(phi, 0, m) for m in range(1 << len(team))}


def probe_downward_closed(phi: Formula, sampler: Iterable[Team], budget: int) -> ProbeResult:
    """Counterexample (T, T') with T' a subteam, T |= phi and T' not."""
    def test(team: Team):
        table = _truth_table(team, phi)
        full = team.full_mask()
        if table[full]:
            for m in submasks(full):
                if not table[m]:
                    return (team, team.subteam(m))
        return None

    return _probe(sampler, budget, test)


def probe_union_closed(phi: Formula, sampler: Iterable[Team], budget: int) -> ProbeResult:
    """Counterexample (T1, T2, T1 u T2) with T1, T2 |= phi and the union not."""
    def test(team: Team):
        table = _truth_table(team, phi)
        if not table[0]:
            return (team.subteam(0),)  # union of the empty family
        good = [m for m, v in table.items() if v]
        for a in good:
            for b in good:
                if not table[a | b]:
                    return (team.subteam(a), team.subteam(b), team.subteam(a | b))
        return None

    return _probe(sampler, budget, test)


def probe_flat(phi: Formula, sampler: Iterable[Team], budget: int) -> ProbeResult:
    """Counterexample T where T |= phi differs from all singletons satisfying phi."""
    def test(team: Team):
        ctx = EvalContext(team)
        whole = ctx.check(phi)
        singles = all(ctx.check(phi, 0, 1 << i) for i in range(len(team)))
        return (team,) if whole != singles else None

    return _probe(sampler, budget, test)


def equiv_check(phi: Formula, psi: Formula, sampler: Iterable[Team], budget: int) -> ProbeResult:
    def test(team: Team):
        ctx = EvalContext(team)
        return (team,) if ctx.check(phi) != ctx.check(psi) else None

    return _probe(sampler, budget, test)


def check_fresh(team: Team, phi: Formula, k: int) -> bool:
    """check on an explicitly built suffix team (used to cross-check shifting)."""
    return check(team_suffix(team, k), phi)
