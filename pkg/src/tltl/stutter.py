"""Team stuttering: canonical stutter-free teams, expansions, equivalence.

Everything goes through the snapshot lasso of a team, whose columns are the
team's labels at each position.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import trace as tr
from .errors import MisalignedSpec
from .team import Team, snapshot, unsnapshot
from .trace import LassoTrace


@dataclass(frozen=True)
class StutterSpec:
    """Block lengths of a stuttering function.

    The k-th block has length prefix[k] for k < len(prefix), afterwards the
    loop lengths repeat forever; f(k) is the start of block k.
    """

    prefix: tuple[int, ...]
    loop: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop or any(m < 1 for m in self.prefix + self.loop):
            raise ValueError("multiplicities must be >= 1 and the loop part nonempty")

    def block(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.loop[(k - len(self.prefix)) % len(self.loop)]

    def starts(self, limit: int) -> list[int]:
        """f(0), f(1), ... for all values below limit."""
        out, pos, k = [], 0, 0
        while pos < limit:
            out.append(pos)
            pos += self.block(k)
            k += 1
        return out


def identity_spec() -> StutterSpec:
    return StutterSpec((), (1,))


def _runs(seq: list[int]) -> list[int]:
    out: list[int] = []
    for a in seq:
        if not out or out[-1] != a:
            out.append(a)
    return out


def canonical_snapshot(s: LassoTrace) -> LassoTrace:
    """Delete stuttering columns of a normalized snapshot lasso."""
    s = tr.normalize(s)
    prefix, loop = list(s.prefix), list(s.loop)
    if len(loop) == 1:
        return tr.lasso(_runs(prefix), loop)
    r = next(i for i in range(len(loop)) if loop[i] != loop[i - 1])
    prefix = prefix + loop[:r]
    loop = loop[r:] + loop[:r]
    cp, cl = _runs(prefix), _runs(loop)
    if cp and cp[-1] == cl[0]:
        cp.pop()
    return tr.lasso(cp, cl)


def canonical_stutter_free(T: Team) -> Team:
    canon = canonical_snapshot(snapshot(T))
    return Team(T.alphabet, unsnapshot(canon, T.alphabet, len(T)))


def stutter_equivalent(T: Team, S: Team) -> bool:
    return canonical_stutter_free(T) == canonical_stutter_free(S)


def stuttering_positions(T: Team) -> list[int]:
    """Stuttering positions below the snapshot horizon (the rest repeat periodically)."""
    s = snapshot(T)
    n = len(s)
    constant_from = len(s.prefix) if len(s.loop) == 1 else None
    out = []
    for i in range(n):
        if constant_from is not None and i >= constant_from:
            break
        if tr.at(s, i) == tr.at(s, i + 1):
            out.append(i)
    return out


def is_stutter_free(T: Team) -> bool:
    return not stuttering_positions(T)


def expand(T: Team, spec: StutterSpec) -> Team:
    """Repeat column k of T's snapshot lasso block(k) times."""
    s = snapshot(T)
    if len(spec.prefix) != len(s.prefix) or len(spec.loop) != len(s.loop):
        raise MisalignedSpec(
            f"spec shape ({len(spec.prefix)},{len(spec.loop)}) does not match "
            f"snapshot columns ({len(s.prefix)},{len(s.loop)})"
        )
    pre = [a for a, m in zip(s.prefix, spec.prefix) for _ in range(m)]
    loop = [a for a, m in zip(s.loop, spec.loop) for _ in range(m)]
    return Team(T.alphabet, unsnapshot(tr.lasso(pre, loop), T.alphabet, len(T)))


def random_spec(rng: random.Random, T: Team, max_mult: int = 3) -> StutterSpec:
    s = snapshot(T)
    return StutterSpec(
        tuple(rng.randint(1, max_mult) for _ in s.prefix),
        tuple(rng.randint(1, max_mult) for _ in s.loop),
    )


def _joint_bound(spec: StutterSpec, T: Team) -> int:
    h = T.horizon()
    period = math.lcm(sum(spec.loop), h.L)
    return max(sum(spec.prefix), h.P) + 2 * period + 1


def is_stuttering_function(spec: StutterSpec, T: Team) -> bool:
    """Is every block of spec constant on every trace of T?"""
    s = snapshot(T)
    limit = _joint_bound(spec, T)
    starts = set(spec.starts(limit))
    return all(j in starts or tr.at(s, j) == tr.at(s, j - 1) for j in range(1, limit))


def contract(T: Team, spec: StutterSpec) -> Team:
    """The team T[f] = {t(f(0)) t(f(1)) ... : t in T}."""
    h = T.horizon()
    kp, m = len(spec.prefix), len(spec.loop)
    start = kp + m * math.ceil(max(h.P - kp, 0) / m)
    count = start + m * h.L
    positions = _first_starts(spec, count)

    def one(t: LassoTrace) -> LassoTrace:
        word = [tr.at(t, p) for p in positions]
        return tr.lasso(word[:start], word[start:])

    return Team(T.alphabet, (one(t) for t in T.traces))


def _first_starts(spec: StutterSpec, count: int) -> list[int]:
    out, pos = [], 0
    for k in range(count):
        out.append(pos)
        pos += spec.block(k)
    return out
