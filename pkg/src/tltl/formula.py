"""LTL with team semantics and Boolean negation: AST, parser, printer, analysis.

Formulas are hash-consed: structurally equal trees are the same object, so
identity comparison is structural comparison and ``uid`` is a stable
memoization key for the lifetime of the process.
"""
from __future__ import annotations

import enum
import itertools
import re
import threading
import weakref
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import FormulaSyntaxError


class Kind(enum.Enum):
    PROP = "Prop"
    NEG = "Neg"
    AND = "And"
    SPLIT_OR = "SplitOr"
    BNEG = "BNeg"
    NEXT = "Next"
    FUTURE = "Future"
    GLOBALLY = "Globally"
    UNTIL = "Until"
    RELEASE = "Release"
    DEP = "Dep"
    TOP = "Top"
    BOT = "Bot"
    BOR = "BOr"
    BIMP = "BImp"
    BIFF = "BIff"
    HOOK = "Hook"
    SUB_EX = "SubEx"
    SUB_ALL = "SubAll"
    SING_EX = "SingEx"
    SING_ALL = "SingAll"
    COND_SUB_EX = "CondSubEx"
    COND_SUB_ALL = "CondSubAll"
    COND_SING_EX = "CondSingEx"
    COND_SING_ALL = "CondSingAll"


TEMPORAL_UNARY = {Kind.NEXT: "X", Kind.FUTURE: "F", Kind.GLOBALLY: "G"}
TEMPORAL_BINARY = {Kind.UNTIL: "U", Kind.RELEASE: "R"}
TEMPORAL_KINDS = frozenset(TEMPORAL_UNARY) | frozenset(TEMPORAL_BINARY)
CORE_KINDS = frozenset(
    {Kind.PROP, Kind.NEG, Kind.AND, Kind.SPLIT_OR, Kind.BNEG, Kind.TOP, Kind.BOT}
) | TEMPORAL_KINDS
QUANTIFIERS = {Kind.SING_EX: "E1", Kind.SING_ALL: "A1", Kind.SUB_EX: "EE", Kind.SUB_ALL: "AA"}
COND_QUANTIFIERS = {
    Kind.COND_SING_EX: "E1",
    Kind.COND_SING_ALL: "A1",
    Kind.COND_SUB_EX: "EE",
    Kind.COND_SUB_ALL: "AA",
}

# operator letters accepted in fragment_check op sets
OP_LETTERS = {"X": Kind.NEXT, "F": Kind.FUTURE, "G": Kind.GLOBALLY, "U": Kind.UNTIL, "R": Kind.RELEASE}

NAME_RE = re.compile(r"[A-Za-z0-9_@]+")
KEYWORDS = frozenset({"X", "F", "G", "U", "R", "E1", "A1", "EE", "AA", "top", "bot", "dep", "BOR"})


class Formula:
    """Immutable, interned formula node."""

    __slots__ = ("kind", "children", "name", "uid", "__weakref__")

    kind: Kind
    children: tuple["Formula", ...]
    name: str | None
    uid: int

    def __setattr__(self, key, value):
        raise AttributeError("Formula is immutable")

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def __reduce__(self):
        return (parse, (to_text(self), True))

    # convenient accessors
    @property
    def left(self) -> "Formula":
        return self.children[0]

    @property
    def right(self) -> "Formula":
        return self.children[1]

    @property
    def operand(self) -> "Formula":
        return self.children[-1]

    @property
    def guard(self) -> "Formula":
        return self.children[0]

    @property
    def dep_args(self) -> tuple["Formula", ...]:
        return self.children[:-1]

    @property
    def dep_target(self) -> "Formula":
        return self.children[-1]


_table: "weakref.WeakValueDictionary[tuple, Formula]" = weakref.WeakValueDictionary()
_lock = threading.Lock()
_uids = itertools.count(1)


def _make(kind: Kind, children: tuple = (), name: str | None = None) -> Formula:
    key = (kind, tuple(c.uid for c in children), name)
    with _lock:
        node = _table.get(key)
        if node is None:
            node = object.__new__(Formula)
            object.__setattr__(node, "kind", kind)
            object.__setattr__(node, "children", children)
            object.__setattr__(node, "name", name)
            object.__setattr__(node, "uid", next(_uids))
            _table[key] = node
        return node


def check_name(name: str, allow_reserved: bool = True) -> str:
    if not NAME_RE.fullmatch(name) or name in KEYWORDS:
        raise ValueError(f"invalid proposition name {name!r}")
    if name.startswith("@") and not allow_reserved:
        raise ValueError(f"proposition name {name!r} uses the reserved '@' namespace")
    return name


# ---------------------------------------------------------------- constructors

def Prop(name: str) -> Formula:
    return _make(Kind.PROP, (), check_name(name))


def Neg(a: Formula) -> Formula:
    return _make(Kind.NEG, (a,))


def And(a: Formula, b: Formula) -> Formula:
    return _make(Kind.AND, (a, b))


def SplitOr(a: Formula, b: Formula) -> Formula:
    return _make(Kind.SPLIT_OR, (a, b))


def BNeg(a: Formula) -> Formula:
    return _make(Kind.BNEG, (a,))


def Next(a: Formula) -> Formula:
    return _make(Kind.NEXT, (a,))


def Future(a: Formula) -> Formula:
    return _make(Kind.FUTURE, (a,))


def Globally(a: Formula) -> Formula:
    return _make(Kind.GLOBALLY, (a,))


def Until(a: Formula, b: Formula) -> Formula:
    return _make(Kind.UNTIL, (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return _make(Kind.RELEASE, (a, b))


def Dep(args: Sequence[Formula], target: Formula) -> Formula:
    return _make(Kind.DEP, tuple(args) + (target,))


def Top() -> Formula:
    return _make(Kind.TOP)


def Bot() -> Formula:
    return _make(Kind.BOT)


def BOr(a: Formula, b: Formula) -> Formula:
    return _make(Kind.BOR, (a, b))


def BImp(a: Formula, b: Formula) -> Formula:
    return _make(Kind.BIMP, (a, b))


def BIff(a: Formula, b: Formula) -> Formula:
    return _make(Kind.BIFF, (a, b))


def Hook(a: Formula, b: Formula) -> Formula:
    return _make(Kind.HOOK, (a, b))


def SubEx(a: Formula) -> Formula:
    return _make(Kind.SUB_EX, (a,))


def SubAll(a: Formula) -> Formula:
    return _make(Kind.SUB_ALL, (a,))


def SingEx(a: Formula) -> Formula:
    return _make(Kind.SING_EX, (a,))


def SingAll(a: Formula) -> Formula:
    return _make(Kind.SING_ALL, (a,))


def CondSubEx(g: Formula, a: Formula) -> Formula:
    return _make(Kind.COND_SUB_EX, (g, a))


def CondSubAll(g: Formula, a: Formula) -> Formula:
    return _make(Kind.COND_SUB_ALL, (g, a))


def CondSingEx(g: Formula, a: Formula) -> Formula:
    return _make(Kind.COND_SING_EX, (g, a))


def CondSingAll(g: Formula, a: Formula) -> Formula:
    return _make(Kind.COND_SING_ALL, (g, a))


def conj(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is top."""
    out = None
    for f in items:
        out = f if out is None else And(out, f)
    return Top() if out is None else out


def split_disj(items: Iterable[Formula]) -> Formula:
    """Left-nested split disjunction; the empty one is bot."""
    out = None
    for f in items:
        out = f if out is None else SplitOr(out, f)
    return Bot() if out is None else out


def bool_disj(items: Iterable[Formula]) -> Formula:
    """Left-nested Boolean disjunction; the empty one is ~top."""
    out = None
    for f in items:
        out = f if out is None else BOr(out, f)
    return BNeg(Top()) if out is None else out


def implies(a: Formula, b: Formula) -> Formula:
    """Classical implication, read as !a | b."""
    return SplitOr(Neg(a), b)


_UNARY_CTORS: dict[Kind, Callable[[Formula], Formula]] = {
    Kind.NEG: Neg, Kind.BNEG: BNeg, Kind.NEXT: Next, Kind.FUTURE: Future,
    Kind.GLOBALLY: Globally, Kind.SUB_EX: SubEx, Kind.SUB_ALL: SubAll,
    Kind.SING_EX: SingEx, Kind.SING_ALL: SingAll,
}


def rebuild(node: Formula, children: Sequence[Formula]) -> Formula:
    """Same node kind with new children."""
    if node.kind in (Kind.PROP, Kind.TOP, Kind.BOT):
        return node
    return _make(node.kind, tuple(children), node.name)


# ---------------------------------------------------------------- traversal

def iter_nodes(phi: Formula) -> Iterator[Formula]:
    """Distinct subformulas, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[Formula, bool]] = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        if node.uid in seen:
            continue
        if expanded:
            seen.add(node.uid)
            yield node
        else:
            stack.append((node, True))
            for c in reversed(node.children):
                if c.uid not in seen:
                    stack.append((c, False))


def props(phi: Formula) -> set[str]:
    return {n.name for n in iter_nodes(phi) if n.kind is Kind.PROP}


def size(phi: Formula) -> int:
    """Tree size (shared subtrees counted once per occurrence)."""
    memo: dict[int, int] = {}
    for n in iter_nodes(phi):
        memo[n.uid] = 1 + sum(memo[c.uid] for c in n.children)
    return memo[phi.uid]


def transform(phi: Formula, fn: Callable[[Formula, tuple[Formula, ...]], Formula]) -> Formula:
    """Bottom-up rewrite; fn receives the original node and its rewritten children."""
    memo: dict[int, Formula] = {}
    for n in iter_nodes(phi):
        memo[n.uid] = fn(n, tuple(memo[c.uid] for c in n.children))
    return memo[phi.uid]


def substitute_props(phi: Formula, mapping: Mapping[str, Formula]) -> Formula:
    def step(n: Formula, kids: tuple[Formula, ...]) -> Formula:
        if n.kind is Kind.PROP:
            return mapping.get(n.name, n)
        return rebuild(n, kids)

    return transform(phi, step)


def is_tilde_free(phi: Formula) -> bool:
    return all(n.kind is not Kind.BNEG for n in iter_nodes(desugar(phi)))


PURE_LTL_KINDS = frozenset(
    {Kind.PROP, Kind.NEG, Kind.AND, Kind.SPLIT_OR, Kind.TOP, Kind.BOT}
) | TEMPORAL_KINDS


def is_pure_ltl(phi: Formula) -> bool:
    return all(n.kind in PURE_LTL_KINDS for n in iter_nodes(phi))


# ---------------------------------------------------------------- desugaring

def _desugar_node(n: Formula, k: tuple[Formula, ...]) -> Formula:
    K = n.kind
    top, bot = Top(), Bot()

    def bor(a, b):
        return BNeg(And(BNeg(a), BNeg(b)))

    def bimp(a, b):
        return bor(BNeg(a), b)

    def sub_ex(a):
        return SplitOr(top, a)

    def sub_all(a):
        return BNeg(sub_ex(BNeg(a)))

    def sing_ex(a):
        return sub_ex(And(BNeg(bot), sub_all(bor(bot, a))))

    def cond_sub_ex(g, a):
        return SplitOr(Neg(Neg(g)), a)

    def cond_sing_ex(g, a):
        inner = cond_sub_ex(g, And(sing_ex(g), BNeg(a)))
        return cond_sub_ex(g, And(sing_ex(g), BNeg(inner)))

    def dep1(a):
        return bor(Neg(Neg(a)), Neg(a))

    if K in CORE_KINDS:
        return rebuild(n, k)
    if K is Kind.BOR:
        return bor(*k)
    if K is Kind.BIMP:
        return bimp(*k)
    if K is Kind.BIFF:
        return And(bimp(k[0], k[1]), bimp(k[1], k[0]))
    if K is Kind.HOOK:
        return SplitOr(Neg(k[0]), And(Neg(Neg(k[0])), k[1]))
    if K is Kind.SUB_EX:
        return sub_ex(k[0])
    if K is Kind.SUB_ALL:
        return sub_all(k[0])
    if K is Kind.SING_EX:
        return sing_ex(k[0])
    if K is Kind.SING_ALL:
        return BNeg(sing_ex(BNeg(k[0])))
    if K is Kind.COND_SUB_EX:
        return cond_sub_ex(*k)
    if K is Kind.COND_SUB_ALL:
        return BNeg(cond_sub_ex(k[0], BNeg(k[1])))
    if K is Kind.COND_SING_EX:
        return cond_sing_ex(*k)
    if K is Kind.COND_SING_ALL:
        return BNeg(cond_sing_ex(k[0], BNeg(k[1])))
    if K is Kind.DEP:
        args, target = k[:-1], k[-1]
        if not args:
            return dep1(target)
        body = And(conj(dep1(a) for a in args), BNeg(dep1(target)))
        return BNeg(SplitOr(top, body))
    raise AssertionError(K)


def desugar(phi: Formula, neg_to_singleton: bool = False) -> Formula:
    """Expand every derived connective into core kinds.

    With ``neg_to_singleton`` every non-atomic ``!φ`` is additionally rewritten
    to ``~E1 φ`` (no singleton satisfies φ), with E1 expanded as well.
    """
    core = transform(phi, _desugar_node)
    if not neg_to_singleton:
        return core

    def push(n: Formula, k: tuple[Formula, ...]) -> Formula:
        if n.kind is Kind.NEG and k[0].kind is not Kind.PROP:
            return BNeg(_expand_sing_ex(k[0]))
        return rebuild(n, k)

    return transform(core, push)


def _expand_sing_ex(a: Formula) -> Formula:
    return transform(SingEx(a), lambda n, k: _desugar_node(n, k) if n.kind is Kind.SING_EX else rebuild(n, k))


# ---------------------------------------------------------------- depth and fragments

def temporal_depth(phi: Formula) -> int:
    memo: dict[int, int] = {}
    for n in iter_nodes(phi):
        d = max((memo[c.uid] for c in n.children), default=0)
        memo[n.uid] = d + 1 if n.kind in TEMPORAL_KINDS else d
    return memo[phi.uid]


def lenient_rewrite(phi: Formula, ops: Iterable[str]) -> Formula:
    """Rewrite G, R, F into permitted operators where an equivalence exists."""
    allowed = {OP_LETTERS[o] if isinstance(o, str) else o for o in ops}

    def step(n: Formula, k: tuple[Formula, ...]) -> Formula:
        K = n.kind
        if K is Kind.GLOBALLY and K not in allowed:
            if Kind.FUTURE in allowed:
                return BNeg(Future(BNeg(k[0])))
            if Kind.UNTIL in allowed:
                return BNeg(Until(Top(), BNeg(k[0])))
        if K is Kind.FUTURE and K not in allowed and Kind.UNTIL in allowed:
            return Until(Top(), k[0])
        if K is Kind.RELEASE and K not in allowed and Kind.UNTIL in allowed:
            return BNeg(Until(BNeg(k[0]), BNeg(k[1])))
        return rebuild(n, k)

    return transform(phi, step)


def fragment_check(phi: Formula, ops: Iterable[str], k: int, lenient: bool = False) -> bool:
    """Does φ lie in LTL_k(ops), optionally after the standard rewrites?"""
    ops = list(ops)
    allowed = {OP_LETTERS[o] if isinstance(o, str) else o for o in ops}
    psi = desugar(phi)
    if lenient:
        psi = lenient_rewrite(psi, ops)
    if any(n.kind in TEMPORAL_KINDS and n.kind not in allowed for n in iter_nodes(psi)):
        return False
    return temporal_depth(psi) <= k


def downward_closed_syntactically(phi: Formula) -> bool:
    """Conservative syntactic test for downward closure."""
    memo: dict[int, bool] = {}
    for n in iter_nodes(phi):
        K = n.kind
        kids = [memo[c.uid] for c in n.children]
        if K in (Kind.NEG, Kind.DEP, Kind.SING_ALL, Kind.SUB_ALL, Kind.PROP, Kind.TOP, Kind.BOT):
            memo[n.uid] = True
        elif K in (Kind.BNEG, Kind.BIMP, Kind.BIFF, Kind.SING_EX, Kind.COND_SING_EX):
            memo[n.uid] = False
        elif K in (Kind.HOOK, Kind.COND_SUB_EX, Kind.COND_SUB_ALL, Kind.COND_SING_ALL):
            memo[n.uid] = kids[1]
        else:
            memo[n.uid] = all(kids)
    return memo[phi.uid]


# ---------------------------------------------------------------- printing

# binding strength of binary operators (higher binds tighter) and associativity
_BINARY = {
    Kind.UNTIL: (9, "U", "right"),
    Kind.RELEASE: (9, "R", "right"),
    Kind.AND: (8, "&", "left"),
    Kind.SPLIT_OR: (7, "|", "left"),
    Kind.BOR: (6, "BOR", "left"),
    Kind.HOOK: (5, "~>", "right"),
    Kind.BIMP: (2, "->>", "right"),
    Kind.BIFF: (1, "<->>", "left"),
}
_ATOM_PREC = 10


def to_text(phi: Formula) -> str:
    memo: dict[int, tuple[str, int]] = {}
    for n in iter_nodes(phi):
        memo[n.uid] = _print_node(n, memo)
    return memo[phi.uid][0]


def _wrap(entry: tuple[str, int], need: int) -> str:
    text, prec = entry
    return text if prec >= need else f"({text})"


def _print_node(n: Formula, memo: dict[int, tuple[str, int]]) -> tuple[str, int]:
    K = n.kind
    kids = [memo[c.uid] for c in n.children]
    if K is Kind.PROP:
        return n.name, _ATOM_PREC
    if K is Kind.TOP:
        return "top", _ATOM_PREC
    if K is Kind.BOT:
        return "bot", _ATOM_PREC
    if K is Kind.NEG:
        return "!" + _wrap(kids[0], _ATOM_PREC), _ATOM_PREC
    if K is Kind.BNEG:
        return "~" + _wrap(kids[0], _ATOM_PREC), _ATOM_PREC
    if K in TEMPORAL_UNARY:
        return f"{TEMPORAL_UNARY[K]} " + _wrap(kids[0], _ATOM_PREC), _ATOM_PREC
    if K in QUANTIFIERS:
        return f"{QUANTIFIERS[K]} " + _wrap(kids[0], _ATOM_PREC), _ATOM_PREC
    if K in COND_QUANTIFIERS:
        return f"{COND_QUANTIFIERS[K]}[{kids[0][0]}] " + _wrap(kids[1], _ATOM_PREC), _ATOM_PREC
    if K is Kind.DEP:
        args = ", ".join(k[0] for k in kids[:-1])
        return f"dep({args}; {kids[-1][0]})", _ATOM_PREC
    prec, sym, assoc = _BINARY[K]
    lneed, rneed = (prec, prec + 1) if assoc == "left" else (prec + 1, prec)
    return f"{_wrap(kids[0], lneed)} {sym} {_wrap(kids[1], rneed)}", prec


# ---------------------------------------------------------------- parsing

_UNICODE = {
    "¬": "!", "∼": "~", "∧": "&", "∨": "|", "⩔": "BOR", "⊸": "->>", "→": "->",
    "↔": "<->", "↪": "~>", "⊤": "top", "⊥": "bot",
}
_ESCAPES = {
    "neg": "!", "sim": "~", "land": "&", "lor": "|", "bor": "BOR", "limp": "->>",
    "liff": "<->>", "to": "->", "iff": "<->", "hook": "~>", "top": "top", "bot": "bot",
}
_SYMBOLS = ["<->>", "->>", "<->", "->", "~>", "!", "~", "&", "|", "(", ")", "[", "]", ",", ";"]

# parse-only levels for classical implication and biconditional
_PARSE_BINARY = {
    "U": (9, "right"), "R": (9, "right"), "&": (8, "left"), "|": (7, "left"),
    "BOR": (6, "left"), "~>": (5, "right"), "->": (4, "right"), "<->": (3, "left"),
    "->>": (2, "right"), "<->>": (1, "left"),
}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Tokens as (type, value, position) with type in {name, sym, end}."""
    out: list[tuple[str, str, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _UNICODE:
            val = _UNICODE[c]
            out.append(("name" if val in ("top", "bot") else "sym", val, i))
            i += 1
            continue
        if c == "\\":
            m = re.compile(r"[A-Za-z]+").match(text, i + 1)
            word = m.group(0) if m else ""
            if word not in _ESCAPES:
                raise FormulaSyntaxError(f"unknown escape '\\{word}'", i)
            val = _ESCAPES[word]
            out.append(("name" if val in ("top", "bot") else "sym", val, i))
            i += 1 + len(word)
            continue
        m = NAME_RE.match(text, i)
        if m:
            out.append(("name", m.group(0), i))
            i = m.end()
            continue
        for s in _SYMBOLS:
            if text.startswith(s, i):
                out.append(("sym", s, i))
                i += len(s)
                break
        else:
            raise FormulaSyntaxError(f"unexpected character {c!r}", i)
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str, allow_reserved: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        typ, val, pos = self.take()
        if val != value or typ == "end":
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def binop(self) -> str | None:
        typ, val, _ = self.peek()
        if typ == "sym" and val in _PARSE_BINARY:
            return val
        if typ == "name" and val in ("U", "R", "BOR"):
            return val
        return None

    def expr(self, min_prec: int = 0) -> Formula:
        left = self.unary()
        while True:
            op = self.binop()
            if op is None:
                return left
            prec, assoc = _PARSE_BINARY[op]
            if prec < min_prec:
                return left
            self.take()
            right = self.expr(prec if assoc == "right" else prec + 1)
            left = _combine(op, left, right)

    def unary(self) -> Formula:
        typ, val, pos = self.peek()
        if typ == "sym" and val == "!":
            self.take()
            return Neg(self.unary())
        if typ == "sym" and val == "~":
            self.take()
            return BNeg(self.unary())
        if typ == "name" and val in ("X", "F", "G"):
            self.take()
            return {"X": Next, "F": Future, "G": Globally}[val](self.unary())
        if typ == "name" and val in ("E1", "A1", "EE", "AA"):
            self.take()
            if self.peek()[1] == "[" and self.peek()[0] == "sym":
                self.take()
                guard = self.expr()
                self.expect("]")
                ctor = {"E1": CondSingEx, "A1": CondSingAll, "EE": CondSubEx, "AA": CondSubAll}[val]
                return ctor(guard, self.unary())
            ctor1 = {"E1": SingEx, "A1": SingAll, "EE": SubEx, "AA": SubAll}[val]
            return ctor1(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        typ, val, pos = self.take()
        if typ == "sym" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if typ == "name":
            if val == "top":
                return Top()
            if val == "bot":
                return Bot()
            if val == "dep" and self.peek()[1] == "(":
                return self.dep()
            if val in KEYWORDS:
                raise FormulaSyntaxError(f"unexpected keyword {val!r}", pos)
            if val.startswith("@") and not self.allow_reserved:
                raise FormulaSyntaxError(f"reserved name {val!r} not allowed here", pos)
            return Prop(val)
        raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    def dep(self) -> Formula:
        self.expect("(")
        items: list[Formula] = []
        target = None
        if self.peek()[1] == ";":
            self.take()
            target = self.expr()
        else:
            items.append(self.expr())
            while self.peek()[1] == ",":
                self.take()
                items.append(self.expr())
            if self.peek()[1] == ";":
                self.take()
                target = self.expr()
        self.expect(")")
        if target is None:
            # dep(φ) is the zero-argument atom
            if len(items) != 1:
                raise FormulaSyntaxError("dependence atom needs ';' before its target", self.peek()[2])
            return Dep([], items[0])
        return Dep(items, target)


def _combine(op: str, a: Formula, b: Formula) -> Formula:
    if op == "->":
        return implies(a, b)
    if op == "<->":
        return And(implies(a, b), implies(b, a))
    return {
        "U": Until, "R": Release, "&": And, "|": SplitOr, "BOR": BOr,
        "~>": Hook, "->>": BImp, "<->>": BIff,
    }[op](a, b)


def parse(text: str, allow_reserved: bool = True) -> Formula:
    """Parse the ASCII (or Unicode) surface syntax.

    ``allow_reserved=False`` rejects names in the generated '@' namespace.
    """
    p = _Parser(text, allow_reserved)
    if p.peek()[0] == "end":
        raise FormulaSyntaxError("empty formula", 0)
    phi = p.expr()
    typ, val, pos = p.peek()
    if typ != "end":
        raise FormulaSyntaxError(f"unexpected trailing {val!r}", pos)
    return phi
