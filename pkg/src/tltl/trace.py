"""Ultimately periodic traces stored as prefix + loop of bitset labels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AlphabetOverflow

MAX_ALPHABET = 512

Label = int  # bit i set <=> alphabet[i] holds


@dataclass(frozen=True)
class LassoTrace:
    """The word prefix . loop^omega; labels are bitsets over some alphabet."""

    prefix: tuple[Label, ...]
    loop: tuple[Label, ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("loop must be nonempty")
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "loop", tuple(self.loop))

    def __len__(self) -> int:
        return len(self.prefix) + len(self.loop)

    def at(self, i: int) -> Label:
        return at(self, i)


def at(t: LassoTrace, i: int) -> Label:
    p = len(t.prefix)
    if i < p:
        return t.prefix[i]
    return t.loop[(i - p) % len(t.loop)]


def minimal_period(seq: Sequence[Label]) -> int:
    """Smallest d dividing len(seq) with seq a d-periodic word (border array)."""
    n = len(seq)
    fail = [0] * (n + 1)
    fail[0] = -1
    k = -1
    for i in range(n):
        while k >= 0 and seq[k] != seq[i]:
            k = fail[k]
        k += 1
        fail[i + 1] = k
    d = n - fail[n]
    return d if n % d == 0 else n


def normalize(t: LassoTrace) -> LassoTrace:
    loop = list(t.loop[: minimal_period(t.loop)])
    prefix = list(t.prefix)
    while prefix and prefix[-1] == loop[-1]:
        prefix.pop()
        loop.insert(0, loop.pop())
    return LassoTrace(tuple(prefix), tuple(loop))


def lasso(prefix: Iterable[Label], loop: Iterable[Label]) -> LassoTrace:
    """Build and normalize."""
    return normalize(LassoTrace(tuple(prefix), tuple(loop)))


def suffix(t: LassoTrace, k: int) -> LassoTrace:
    p = len(t.prefix)
    if k < p:
        return normalize(LassoTrace(t.prefix[k:], t.loop))
    r = (k - p) % len(t.loop)
    return normalize(LassoTrace((), t.loop[r:] + t.loop[:r]))


def project(t: LassoTrace, mask: int) -> LassoTrace:
    """Intersect every label with the bitset ``mask``."""
    return lasso((a & mask for a in t.prefix), (a & mask for a in t.loop))


def is_ultimately_constant(t: LassoTrace) -> bool:
    return len(normalize(t).loop) == 1


def is_constant(t: LassoTrace) -> bool:
    n = normalize(t)
    return len(n.loop) == 1 and not n.prefix


def unroll(t: LassoTrace, n: int) -> list[Label]:
    return [at(t, i) for i in range(n)]


# ---------------------------------------------------------------- named labels

def check_alphabet(alphabet: Sequence[str]) -> None:
    if len(alphabet) > MAX_ALPHABET:
        raise AlphabetOverflow(f"alphabet of {len(alphabet)} propositions exceeds {MAX_ALPHABET}")
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet contains duplicates")


def label_of(names: Iterable[str], alphabet: Sequence[str]) -> Label:
    index = {p: i for i, p in enumerate(alphabet)}
    bits = 0
    for name in names:
        if name not in index:
            raise ValueError(f"proposition {name!r} not in alphabet")
        bits |= 1 << index[name]
    return bits


def names_of(label: Label, alphabet: Sequence[str]) -> list[str]:
    return [p for i, p in enumerate(alphabet) if label >> i & 1]


def trace_from_names(prefix: Iterable[Iterable[str]], loop: Iterable[Iterable[str]],
                     alphabet: Sequence[str]) -> LassoTrace:
    return lasso([label_of(a, alphabet) for a in prefix], [label_of(a, alphabet) for a in loop])


def trace_to_json(t: LassoTrace, alphabet: Sequence[str]) -> dict:
    return {
        "prefix": [names_of(a, alphabet) for a in t.prefix],
        "loop": [names_of(a, alphabet) for a in t.loop],
    }


def trace_from_json(doc: dict, alphabet: Sequence[str]) -> LassoTrace:
    return trace_from_names(doc.get("prefix", []), doc["loop"], alphabet)


def remap(t: LassoTrace, src: Sequence[str], dst: Sequence[str]) -> LassoTrace:
    """Re-express labels over another alphabet (propositions missing in dst are dropped)."""
    pos = {p: i for i, p in enumerate(dst)}
    table = [(i, pos[p]) for i, p in enumerate(src) if p in pos]

    def conv(a: Label) -> Label:
        out = 0
        for i, j in table:
            if a >> i & 1:
                out |= 1 << j
        return out

    return lasso([conv(a) for a in t.prefix], [conv(a) for a in t.loop])


def format_trace(t: LassoTrace, alphabet: Sequence[str]) -> str:
    def lab(a: Label) -> str:
        return "{" + ",".join(names_of(a, alphabet)) + "}"

    pre = "".join(lab(a) for a in t.prefix)
    return f"{pre}({''.join(lab(a) for a in t.loop)})^w"
