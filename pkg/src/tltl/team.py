"""Finite teams of lasso traces with stable base indices."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import trace as tr
from .errors import AlphabetOverflow, HorizonOverflow
from .trace import LassoTrace

MAX_LOOP_LCM = 1 << 20


@dataclass(frozen=True)
class Horizon:
    P: int
    L: int

    @property
    def H(self) -> int:
        return self.P + self.L

    def canonical_shift(self, k: int) -> int:
        return k if k < self.P else self.P + (k - self.P) % self.L

    def next_shift(self, s: int) -> int:
        return self.canonical_shift(s + 1)


class Team:
    """A set of normalized traces over a declared alphabet.

    Traces keep the order of first occurrence, so a subteam is a bitmask
    over ``range(len(team))``.
    """

    __slots__ = ("alphabet", "traces", "_index", "_horizon")

    def __init__(self, alphabet: Sequence[str], traces: Iterable[LassoTrace] = ()):
        alphabet = tuple(alphabet)
        tr.check_alphabet(alphabet)
        limit = 1 << len(alphabet)
        seen: dict[LassoTrace, int] = {}
        for t in traces:
            t = tr.normalize(t)
            if any(a >= limit for a in t.prefix + t.loop):
                raise ValueError("trace label outside the team alphabet")
            seen.setdefault(t, len(seen))
        self.alphabet = alphabet
        self.traces: tuple[LassoTrace, ...] = tuple(seen)
        self._index = seen
        self._horizon: Horizon | None = None

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __contains__(self, t: LassoTrace) -> bool:
        return tr.normalize(t) in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Team):
            return NotImplemented
        return self.named_set() == other.named_set()

    def __hash__(self) -> int:
        return hash(self.named_set())

    def __repr__(self) -> str:
        body = ", ".join(tr.format_trace(t, self.alphabet) for t in self.traces)
        return f"Team([{body}])"

    def index_of(self, t: LassoTrace) -> int:
        return self._index[tr.normalize(t)]

    def full_mask(self) -> int:
        return (1 << len(self.traces)) - 1

    def subteam(self, mask: int) -> "Team":
        return Team(self.alphabet, (t for i, t in enumerate(self.traces) if mask >> i & 1))

    def mask_of(self, traces: Iterable[LassoTrace]) -> int:
        m = 0
        for t in traces:
            m |= 1 << self.index_of(t)
        return m

    def named_set(self) -> frozenset:
        """Alphabet-independent identity: traces as tuples of proposition-name sets."""
        def lab(a):
            return frozenset(tr.names_of(a, self.alphabet))

        return frozenset(
            (tuple(lab(a) for a in t.prefix), tuple(lab(a) for a in t.loop)) for t in self.traces
        )

    def with_alphabet(self, alphabet: Sequence[str]) -> "Team":
        return Team(alphabet, (tr.remap(t, self.alphabet, alphabet) for t in self.traces))

    def horizon(self) -> Horizon:
        if self._horizon is None:
            object.__setattr__(self, "_horizon", horizon(self))
        return self._horizon

    def __setattr__(self, key, value):
        if hasattr(self, "_horizon") and key != "_horizon":
            raise AttributeError("Team is immutable")
        object.__setattr__(self, key, value)


def horizon(T: Team) -> Horizon:
    P = max((len(t.prefix) for t in T.traces), default=0)
    L = 1
    for t in T.traces:
        L = math.lcm(L, len(t.loop))
        if L > MAX_LOOP_LCM:
            raise HorizonOverflow(f"loop lcm exceeds {MAX_LOOP_LCM}")
    return Horizon(P, L)


def canonical_shift(T: Team, k: int) -> int:
    return T.horizon().canonical_shift(k)


def team_suffix(T: Team, k: int) -> Team:
    return Team(T.alphabet, (tr.suffix(t, k) for t in T.traces))


def condition_masks(T: Team, gamma, evaluator=None) -> tuple[int, int]:
    """(mask of traces whose singleton satisfies gamma, mask of the rest)."""
    from .evaluator import EvalContext

    ctx = evaluator if evaluator is not None else EvalContext(T)
    inside = ctx.condition(gamma, 0, T.full_mask())
    return inside, T.full_mask() & ~inside


def condition(T: Team, gamma, evaluator=None) -> Team:
    return T.subteam(condition_masks(T, gamma, evaluator)[0])


def snapshot(T: Team) -> LassoTrace:
    """Single lasso over the product alphabet; bit i*|alphabet|+p encodes (p, i)."""
    width = len(T.alphabet)
    if width * len(T) > tr.MAX_ALPHABET:
        raise AlphabetOverflow("product alphabet of the snapshot exceeds the cap")
    h = T.horizon()

    def column(k: int) -> int:
        col = 0
        for i, t in enumerate(T.traces):
            col |= tr.at(t, k) << (i * width)
        return col

    return tr.lasso([column(k) for k in range(h.P)], [column(k) for k in range(h.P, h.H)])


def unsnapshot(s: LassoTrace, alphabet: Sequence[str], n: int) -> list[LassoTrace]:
    """Split a snapshot lasso back into its n component traces (order kept)."""
    width = len(alphabet)
    mask = (1 << width) - 1
    return [
        tr.lasso([(a >> (i * width)) & mask for a in s.prefix], [(a >> (i * width)) & mask for a in s.loop])
        for i in range(n)
    ]


# ---------------------------------------------------------------- files

def team_from_json(doc: dict) -> Team:
    alphabet = doc.get("alphabet")
    traces = doc.get("traces", [])
    if alphabet is None:
        names = set()
        for t in traces:
            for lab in list(t.get("prefix", [])) + list(t["loop"]):
                names.update(lab)
        alphabet = sorted(names)
    return Team(alphabet, (tr.trace_from_json(t, alphabet) for t in traces))


def team_to_json(T: Team) -> dict:
    return {"alphabet": list(T.alphabet), "traces": [tr.trace_to_json(t, T.alphabet) for t in T.traces]}


def load_team(path: str) -> Team:
    with open(path, encoding="utf-8") as fh:
        return team_from_json(json.load(fh))


def team_from_names(alphabet: Sequence[str], traces: Iterable[tuple]) -> Team:
    """traces: iterable of (prefix, loop) pairs of name lists."""
    return Team(alphabet, (tr.trace_from_names(p, l, alphabet) for p, l in traces))
