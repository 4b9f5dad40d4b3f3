"""Finite serial rooted Kripke structures and their lasso traces."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import formula as fm
from . import trace as tr
from .errors import AlphabetOverflow, EnumerationOverflow
from .formula import Formula
from .trace import LassoTrace

ALL_ULP = "AllUlp"
UNCOUNTABLE = "Uncountable"


@dataclass(frozen=True)
class Kripke:
    alphabet: tuple[str, ...]
    labels: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))

    @property
    def n(self) -> int:
        return len(self.labels)

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in sorted(self.edges):
            if 0 <= a < self.n and 0 <= b < self.n:
                succ[a].append(b)
        return succ

    def label_names(self, w: int) -> list[str]:
        return tr.names_of(self.labels[w], self.alphabet)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    state: int | None
    detail: str = ""

    def __str__(self) -> str:
        where = "" if self.state is None else f"({self.state})"
        return f"{self.kind}{where}" + (f": {self.detail}" if self.detail else "")


def validate(K: Kripke) -> list[Diagnostic]:
    """Empty list means the structure is well formed."""
    out: list[Diagnostic] = []
    if K.n == 0:
        return [Diagnostic("NoStates", None)]
    if not 0 <= K.root < K.n:
        out.append(Diagnostic("BadRoot", K.root))
    for a, b in sorted(K.edges):
        for w in (a, b):
            if not 0 <= w < K.n:
                out.append(Diagnostic("BadEdge", w, f"edge {a}->{b}"))
    limit = 1 << len(K.alphabet)
    for w, lab in enumerate(K.labels):
        if not 0 <= lab < limit:
            out.append(Diagnostic("BadLabel", w))
    for w, succ in enumerate(K.successors()):
        if not succ:
            out.append(Diagnostic("NotSerial", w))
    return out


# ---------------------------------------------------------------- files

def kripke_from_json(doc: dict) -> Kripke:
    n = int(doc["states"])
    labels = doc.get("labels", [[] for _ in range(n)])
    if len(labels) != n:
        raise ValueError("labels list must have one entry per state")
    alphabet = doc.get("alphabet")
    if alphabet is None:
        alphabet = sorted({p for lab in labels for p in lab})
    return Kripke(
        tuple(alphabet),
        tuple(tr.label_of(lab, alphabet) for lab in labels),
        frozenset(tuple(e) for e in doc.get("edges", [])),
        int(doc.get("root", 0)),
    )


def kripke_to_json(K: Kripke) -> dict:
    return {
        "states": K.n,
        "edges": [list(e) for e in sorted(K.edges)],
        "labels": [K.label_names(w) for w in range(K.n)],
        "root": K.root,
        "alphabet": list(K.alphabet),
    }


def load_kripke(path: str) -> Kripke:
    with open(path, encoding="utf-8") as fh:
        return kripke_from_json(json.load(fh))


# ---------------------------------------------------------------- membership

def trace_member(K: Kripke, t: LassoTrace) -> bool:
    """Does some path from the root induce t?

    Search over product nodes (state, position) with positions wrapping into
    the loop; an infinite path exists iff a reachable node lies on a cycle.
    """
    word = list(t.prefix) + list(t.loop)
    n = len(word)
    start = len(t.prefix)
    if K.labels[K.root] != word[0]:
        return False
    succ = K.successors()

    def nexts(node: tuple[int, int]) -> list[tuple[int, int]]:
        w, i = node
        j = i + 1 if i + 1 < n else start
        return [(v, j) for v in succ[w] if K.labels[v] == word[j]]

    # iterative DFS with colours to detect a reachable cycle
    init = (K.root, 0)
    colour: dict[tuple[int, int], int] = {init: 1}
    stack = [(init, iter(nexts(init)))]
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            colour[node] = 2
            stack.pop()
            continue
        c = colour.get(nxt, 0)
        if c == 1:
            return True
        if c == 0:
            colour[nxt] = 1
            stack.append((nxt, iter(nexts(nxt))))
    return False


def _label_words(K: Kripke, length: int, cap: int) -> dict[tuple[int, ...], frozenset[int]]:
    """Label words of the given length read along paths from the root, with end states."""
    succ = K.successors()
    layer: dict[tuple[int, ...], frozenset[int]] = {(K.labels[K.root],): frozenset({K.root})}
    for _ in range(length - 1):
        nxt: dict[tuple[int, ...], set[int]] = {}
        for word, states in layer.items():
            for w in states:
                for v in succ[w]:
                    nxt.setdefault(word + (K.labels[v],), set()).add(v)
        if len(nxt) > cap:
            raise EnumerationOverflow(f"more than {cap} label words of length {length}")
        layer = {k: frozenset(v) for k, v in nxt.items()}
    return layer


def enumerate_ulp_traces(K: Kripke, max_prefix: int, max_loop: int, cap: int = 200_000) -> set[LassoTrace]:
    """All normalized member lassos with |prefix| <= max_prefix and |loop| <= max_loop."""
    if max_prefix < 0 or max_loop < 1:
        raise ValueError("bounds must satisfy max_prefix >= 0 and max_loop >= 1")
    out: set[LassoTrace] = set()
    for total in range(1, max_prefix + max_loop + 1):
        words = _label_words(K, total, cap)
        for word in words:
            for b in range(max(1, total - max_prefix), min(max_loop, total) + 1):
                t = tr.lasso(word[: total - b], word[total - b:])
                if t not in out and trace_member(K, t):
                    out.add(t)
                    if len(out) > cap:
                        raise EnumerationOverflow(f"more than {cap} traces")
    return out


# ---------------------------------------------------------------- characteristic formula

def state_prop(w: int) -> str:
    return f"@pw_{w}"


def chi_formula(K: Kripke) -> tuple[Kripke, Formula]:
    """Augment K with one fresh proposition per state and build its characteristic formula."""
    extra = [state_prop(w) for w in range(K.n)]
    clash = set(extra) & set(K.alphabet)
    if clash:
        raise ValueError(f"alphabet already uses {sorted(clash)}")
    alphabet = K.alphabet + tuple(extra)
    if len(alphabet) > tr.MAX_ALPHABET:
        raise AlphabetOverflow("augmented alphabet exceeds the cap")
    base = len(K.alphabet)
    labels = tuple(lab | 1 << (base + w) for w, lab in enumerate(K.labels))
    K2 = Kripke(alphabet, labels, K.edges, K.root)

    succ = K.successors()
    P = fm.Prop
    clauses = []
    for w in range(K.n):
        parts = [P(state_prop(w))]
        parts += [fm.Neg(P(state_prop(v))) for v in range(K.n) if v != w]
        for i, q in enumerate(K.alphabet):
            parts.append(P(q) if K.labels[w] >> i & 1 else fm.Neg(P(q)))
        parts.append(fm.split_disj(fm.Next(P(state_prop(v))) for v in succ[w]))
        clauses.append(fm.conj(parts))
    chi = fm.And(P(state_prop(K.root)), fm.Globally(fm.split_disj(clauses)))
    return K2, chi


# ---------------------------------------------------------------- countability

def reachable(K: Kripke) -> set[int]:
    succ = K.successors()
    seen = {K.root}
    stack = [K.root]
    while stack:
        w = stack.pop()
        for v in succ[w]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def sccs(K: Kripke) -> list[list[int]]:
    """Strongly connected components (Tarjan, iterative)."""
    succ = K.successors()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on: set[int] = set()
    st: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(K.n):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                st.append(v)
                on.add(v)
            if i < len(succ[v]):
                work.append((v, i + 1))
                u = succ[v][i]
                if u not in index:
                    work.append((u, 0))
                elif u in on:
                    low[v] = min(low[v], index[u])
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    u = st.pop()
                    on.discard(u)
                    comp.append(u)
                    if u == v:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return out


def countability_class(K: Kripke) -> str:
    """Uncountable iff two paths staying inside one reachable cycle component
    start at the same state and read different labels at the same time.

    Inside a strongly connected component any two such divergent paths close
    into two cycles through the start state whose label words do not commute,
    which yields uncountably many traces; otherwise every component admits a
    single infinite label word from each entry state.
    """
    succ = K.successors()
    reach = reachable(K)
    for comp in sccs(K):
        members = set(comp)
        if not members & reach:
            continue
        if len(comp) == 1 and comp[0] not in succ[comp[0]]:
            continue
        w = comp[0]
        seen = {(w, w)}
        stack = [(w, w)]
        while stack:
            a, b = stack.pop()
            if K.labels[a] != K.labels[b]:
                return UNCOUNTABLE
            for x in succ[a]:
                if x not in members:
                    continue
                for y in succ[b]:
                    if y in members and (x, y) not in seen:
                        seen.add((x, y))
                        stack.append((x, y))
    return ALL_ULP


def kripke(alphabet: Sequence[str], labels: Iterable[Iterable[str]], edges: Iterable[tuple[int, int]],
           root: int = 0) -> Kripke:
    """Convenience constructor from named labels."""
    alphabet = tuple(alphabet)
    return Kripke(alphabet, tuple(tr.label_of(l, alphabet) for l in labels), frozenset(edges), root)
