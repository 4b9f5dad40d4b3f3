"""Typed arithmetic of orders one to three: AST, s-expressions, prenexing,
pairing functions, the arity-reduction normal form and a bounded evaluator.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import ArithError, CapExceeded, ThirdOrderUnsupported

# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class ArithType:
    """order 1: numbers; order 2: relations of ``arity`` (or functions when
    ``function`` is set); order 3: relations over relations of arities ``args``."""

    order: int
    arity: int = 0
    args: tuple[int, ...] = ()
    function: bool = False

    def __post_init__(self):
        if self.order == 1:
            ok = self.arity == 0 and not self.args and not self.function
        elif self.order == 2:
            ok = self.arity >= 1 and not self.args
        elif self.order == 3:
            ok = bool(self.args) and all(a >= 1 for a in self.args) and not self.function
        else:
            ok = False
        if not ok:
            raise ArithError(f"malformed type {self!r}")

    def sexpr(self) -> str:
        if self.order == 1:
            return "1"
        if self.order == 2:
            return f"{'fn' if self.function else '2'} {self.arity}"
        return "3 " + " ".join(map(str, self.args))


FO = ArithType(1)


def rel(n: int) -> ArithType:
    return ArithType(2, n)


def fn(n: int) -> ArithType:
    return ArithType(2, n, function=True)


def third(*args: int) -> ArithType:
    return ArithType(3, args=tuple(args))


# ---------------------------------------------------------------- terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class One(Term):
    pass


@dataclass(frozen=True)
class Plus(Term):
    a: Term
    b: Term


@dataclass(frozen=True)
class Times(Term):
    a: Term
    b: Term


@dataclass(frozen=True)
class App(Term):
    fn: str
    args: tuple[Term, ...]


def numeral(m: int) -> Term:
    """Unary numeral 1+...+1 (zero for m = 0)."""
    if m < 0:
        raise ArithError("negative numeral")
    if m == 0:
        return Zero()
    t: Term = One()
    for _ in range(m - 1):
        t = Plus(t, One())
    return t


def numeral_value(t: Term) -> int | None:
    if isinstance(t, Zero):
        return 0
    if isinstance(t, One):
        return 1
    if isinstance(t, Plus) and isinstance(t.b, One):
        v = numeral_value(t.a)
        return None if v is None or v == 0 else v + 1
    return None


def V(name: str) -> Var:
    return Var(name)


# ---------------------------------------------------------------- formulas


class AFormula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_sexpr(self)


@dataclass(frozen=True)
class Const(AFormula):
    value: bool


@dataclass(frozen=True)
class Eq(AFormula):
    a: Term
    b: Term


@dataclass(frozen=True)
class Lt(AFormula):
    a: Term
    b: Term


@dataclass(frozen=True)
class Le(AFormula):
    a: Term
    b: Term


@dataclass(frozen=True)
class Rel(AFormula):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class HO(AFormula):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Not(AFormula):
    a: AFormula


@dataclass(frozen=True)
class Conj(AFormula):
    items: tuple[AFormula, ...]


@dataclass(frozen=True)
class Disj(AFormula):
    items: tuple[AFormula, ...]


@dataclass(frozen=True)
class Implies(AFormula):
    a: AFormula
    b: AFormula


@dataclass(frozen=True)
class Iff(AFormula):
    a: AFormula
    b: AFormula


@dataclass(frozen=True)
class Exists(AFormula):
    var: str
    type: ArithType
    body: AFormula


@dataclass(frozen=True)
class Forall(AFormula):
    var: str
    type: ArithType
    body: AFormula


Quant = (Exists, Forall)
ATOMS = (Const, Eq, Lt, Le, Rel, HO)


def R(name: str, *args: Term | str) -> Rel:
    return Rel(name, tuple(Var(a) if isinstance(a, str) else a for a in args))


def conj(*items: AFormula) -> AFormula:
    flat: list[AFormula] = []
    for f in items:
        flat.extend(f.items if isinstance(f, Conj) else (f,))
    return flat[0] if len(flat) == 1 else Conj(tuple(flat))


def disj(*items: AFormula) -> AFormula:
    flat: list[AFormula] = []
    for f in items:
        flat.extend(f.items if isinstance(f, Disj) else (f,))
    if not flat:
        return Const(False)
    return flat[0] if len(flat) == 1 else Disj(tuple(flat))


def exists(decls: Sequence[tuple[str, ArithType]], body: AFormula) -> AFormula:
    for name, typ in reversed(decls):
        body = Exists(name, typ, body)
    return body


def forall(decls: Sequence[tuple[str, ArithType]], body: AFormula) -> AFormula:
    for name, typ in reversed(decls):
        body = Forall(name, typ, body)
    return body


def children(f: AFormula) -> tuple[AFormula, ...]:
    if isinstance(f, Not):
        return (f.a,)
    if isinstance(f, (Conj, Disj)):
        return f.items
    if isinstance(f, (Implies, Iff)):
        return (f.a, f.b)
    if isinstance(f, Quant):
        return (f.body,)
    return ()


def with_children(f: AFormula, kids: Sequence[AFormula]) -> AFormula:
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, Conj):
        return Conj(tuple(kids))
    if isinstance(f, Disj):
        return Disj(tuple(kids))
    if isinstance(f, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(f, Iff):
        return Iff(kids[0], kids[1])
    if isinstance(f, Exists):
        return Exists(f.var, f.type, kids[0])
    if isinstance(f, Forall):
        return Forall(f.var, f.type, kids[0])
    return f


def atom_terms(f: AFormula) -> tuple[Term, ...]:
    if isinstance(f, (Eq, Lt, Le)):
        return (f.a, f.b)
    if isinstance(f, Rel):
        return f.args
    return ()


def with_atom_terms(f: AFormula, terms: Sequence[Term]) -> AFormula:
    if isinstance(f, Eq):
        return Eq(*terms)
    if isinstance(f, Lt):
        return Lt(*terms)
    if isinstance(f, Le):
        return Le(*terms)
    if isinstance(f, Rel):
        return Rel(f.name, tuple(terms))
    return f


def term_children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Plus, Times)):
        return (t.a, t.b)
    if isinstance(t, App):
        return t.args
    return ()


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    if isinstance(t, App):
        yield t.fn
    for c in term_children(t):
        yield from term_vars(c)


def quantifier_count(f: AFormula) -> int:
    return (1 if isinstance(f, Quant) else 0) + sum(quantifier_count(c) for c in children(f))


def quantifier_depth(f: AFormula) -> int:
    inner = max((quantifier_depth(c) for c in children(f)), default=0)
    return inner + (1 if isinstance(f, Quant) else 0)


def all_names(f: AFormula) -> set[str]:
    out: set[str] = set()

    def walk(g: AFormula) -> None:
        if isinstance(g, Quant):
            out.add(g.var)
        if isinstance(g, Rel):
            out.add(g.name)
        if isinstance(g, HO):
            out.add(g.name)
            out.update(g.args)
        for t in atom_terms(g):
            out.update(term_vars(t))
        for c in children(g):
            walk(c)

    walk(f)
    return out


def free_vars(f: AFormula) -> set[str]:
    """Names occurring free (numbers, relations, functions and higher-order)."""
    out: set[str] = set()

    def walk(g: AFormula, bound: frozenset[str]) -> None:
        if isinstance(g, Quant):
            walk(g.body, bound | {g.var})
            return
        names: set[str] = set()
        if isinstance(g, Rel):
            names.add(g.name)
        if isinstance(g, HO):
            names.add(g.name)
            names.update(g.args)
        for t in atom_terms(g):
            names.update(term_vars(t))
        out.update(names - bound)
        for c in children(g):
            walk(c, bound)

    walk(f, frozenset())
    return out


def is_closed(f: AFormula) -> bool:
    return not free_vars(f)


def well_formed(f: AFormula, env: Mapping[str, ArithType] | None = None) -> list[str]:
    """Sort and arity errors; free names must be typed in env if given."""
    errors: list[str] = []
    base = dict(env or {})

    def typ(name: str, scope: Mapping[str, ArithType]) -> ArithType | None:
        if name in scope:
            return scope[name]
        if env is not None:
            errors.append(f"untyped free variable {name}")
        return None

    def check_term(t: Term, scope: Mapping[str, ArithType]) -> None:
        if isinstance(t, Var):
            ty = typ(t.name, scope)
            if ty is not None and ty != FO:
                errors.append(f"{t.name} used as a number but has type {ty.sexpr()}")
        elif isinstance(t, App):
            ty = typ(t.fn, scope)
            if ty is not None and not (ty.function and ty.arity == len(t.args)):
                errors.append(f"{t.fn} applied to {len(t.args)} arguments but has type {ty.sexpr()}")
        for c in term_children(t):
            check_term(c, scope)

    def walk(g: AFormula, scope: dict[str, ArithType]) -> None:
        if isinstance(g, Quant):
            inner = dict(scope)
            inner[g.var] = g.type
            walk(g.body, inner)
            return
        if isinstance(g, Rel):
            ty = typ(g.name, scope)
            if ty is not None and not (ty.order == 2 and not ty.function and ty.arity == len(g.args)):
                errors.append(f"{g.name} used as a {len(g.args)}-ary relation")
        if isinstance(g, HO):
            ty = typ(g.name, scope)
            if ty is not None:
                if ty.order != 3 or len(ty.args) != len(g.args):
                    errors.append(f"{g.name} used as a third-order atom with {len(g.args)} arguments")
                else:
                    for a, n in zip(g.args, ty.args):
                        at = typ(a, scope)
                        if at is not None and at != rel(n):
                            errors.append(f"{a} must be a {n}-ary relation inside {g.name}")
        for t in atom_terms(g):
            check_term(t, scope)
        for c in children(g):
            walk(c, scope)

    walk(f, base)
    return errors


# ---------------------------------------------------------------- s-expressions


def term_sexpr(t: Term, decimal: bool = False) -> str:
    if decimal:
        v = numeral_value(t)
        if v is not None:
            return str(v)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Zero):
        return "(zero)"
    if isinstance(t, One):
        return "(one)"
    if isinstance(t, Plus):
        return f"(plus {term_sexpr(t.a, decimal)} {term_sexpr(t.b, decimal)})"
    if isinstance(t, Times):
        return f"(times {term_sexpr(t.a, decimal)} {term_sexpr(t.b, decimal)})"
    if isinstance(t, App):
        return "(app " + " ".join([t.fn] + [term_sexpr(a, decimal) for a in t.args]) + ")"
    raise ArithError(f"unknown term {t!r}")


def to_sexpr(f: AFormula, decimal: bool = False) -> str:
    parts: list[str] = []

    def emit(g: AFormula) -> None:
        if isinstance(g, Const):
            parts.append("(true)" if g.value else "(false)")
        elif isinstance(g, (Eq, Lt, Le)):
            op = {Eq: "eq", Lt: "lt", Le: "le"}[type(g)]
            parts.append(f"({op} {term_sexpr(g.a, decimal)} {term_sexpr(g.b, decimal)})")
        elif isinstance(g, Rel):
            parts.append("(rel " + " ".join([g.name] + [term_sexpr(a, decimal) for a in g.args]) + ")")
        elif isinstance(g, HO):
            parts.append("(ho " + " ".join((g.name,) + g.args) + ")")
        elif isinstance(g, Quant):
            q = "exists" if isinstance(g, Exists) else "forall"
            parts.append(f"({q} ({g.var} {g.type.sexpr()}) ")
            emit(g.body)
            parts.append(")")
        else:
            op = {Not: "not", Conj: "and", Disj: "or", Implies: "implies", Iff: "iff"}[type(g)]
            parts.append(f"({op}")
            for c in children(g):
                parts.append(" ")
                emit(c)
            parts.append(")")

    emit(f)
    return "".join(parts)


def pretty(f: AFormula, decimal: bool = True, indent: int = 2) -> str:
    """Multi-line rendering of the s-expression (for humans)."""
    out: list[str] = []

    def emit(g: AFormula, depth: int) -> None:
        pad = " " * (indent * depth)
        if isinstance(g, ATOMS):
            out.append(pad + to_sexpr(g, decimal))
        elif isinstance(g, Quant):
            q = "exists" if isinstance(g, Exists) else "forall"
            out.append(f"{pad}({q} ({g.var} {g.type.sexpr()})")
            emit(g.body, depth + 1)
            out[-1] += ")"
        else:
            op = {Not: "not", Conj: "and", Disj: "or", Implies: "implies", Iff: "iff"}[type(g)]
            out.append(f"{pad}({op}")
            for c in children(g):
                emit(c, depth + 1)
            out[-1] += ")"

    emit(f, 0)
    return "\n".join(out)


def _tokens(text: str) -> list[str]:
    toks: list[str] = []
    cur = ""
    for ch in text:
        if ch in "()":
            if cur:
                toks.append(cur)
                cur = ""
            toks.append(ch)
        elif ch.isspace():
            if cur:
                toks.append(cur)
                cur = ""
        elif ch == ";" and not cur:
            cur = ";"
        else:
            cur += ch
    if cur:
        toks.append(cur)
    return toks


def _read(toks: list[str], i: int):
    if i >= len(toks):
        raise ArithError("unexpected end of s-expression")
    tok = toks[i]
    if tok == "(":
        items = []
        i += 1
        while i < len(toks) and toks[i] != ")":
            item, i = _read(toks, i)
            items.append(item)
        if i >= len(toks):
            raise ArithError("unbalanced parentheses")
        return items, i + 1
    if tok == ")":
        raise ArithError("unexpected ')'")
    return tok, i + 1


def _strip_comments(text: str) -> str:
    return "\n".join(line.split(";", 1)[0] for line in text.splitlines())


def parse_sexpr(text: str) -> AFormula:
    toks = _tokens(_strip_comments(text))
    tree, i = _read(toks, 0)
    if i != len(toks):
        raise ArithError("trailing input after s-expression")
    return _formula(tree)


def parse_term(text: str) -> Term:
    tree, _ = _read(_tokens(text), 0)
    return _term(tree)


def _term(tree) -> Term:
    if isinstance(tree, str):
        if tree.isdigit():
            return numeral(int(tree))
        return Var(tree)
    if not tree:
        raise ArithError("empty term")
    head, rest = tree[0], tree[1:]
    if head == "zero" and not rest:
        return Zero()
    if head == "one" and not rest:
        return One()
    if head == "plus" and len(rest) == 2:
        return Plus(_term(rest[0]), _term(rest[1]))
    if head == "times" and len(rest) == 2:
        return Times(_term(rest[0]), _term(rest[1]))
    if head == "app" and len(rest) >= 2 and isinstance(rest[0], str):
        return App(rest[0], tuple(_term(a) for a in rest[1:]))
    if head == "num" and len(rest) == 1 and isinstance(rest[0], str) and rest[0].isdigit():
        return numeral(int(rest[0]))
    raise ArithError(f"malformed term {tree!r}")


def _type(items: list) -> ArithType:
    if items == ["1"]:
        return FO
    if len(items) == 2 and items[0] in ("2", "fn") and items[1].isdigit():
        return ArithType(2, int(items[1]), function=items[0] == "fn")
    if len(items) >= 2 and items[0] == "3" and all(x.isdigit() for x in items[1:]):
        return third(*map(int, items[1:]))
    raise ArithError(f"malformed type {items!r}")


def _formula(tree) -> AFormula:
    if not isinstance(tree, list) or not tree or not isinstance(tree[0], str):
        raise ArithError(f"malformed formula {tree!r}")
    head, rest = tree[0], tree[1:]
    if head in ("true", "false") and not rest:
        return Const(head == "true")
    if head in ("eq", "lt", "le") and len(rest) == 2:
        cls = {"eq": Eq, "lt": Lt, "le": Le}[head]
        return cls(_term(rest[0]), _term(rest[1]))
    if head == "rel" and len(rest) >= 2 and isinstance(rest[0], str):
        return Rel(rest[0], tuple(_term(a) for a in rest[1:]))
    if head == "ho" and len(rest) >= 2 and all(isinstance(a, str) for a in rest):
        return HO(rest[0], tuple(rest[1:]))
    if head == "not" and len(rest) == 1:
        return Not(_formula(rest[0]))
    if head == "and":
        return Conj(tuple(_formula(a) for a in rest)) if len(rest) != 1 else _formula(rest[0])
    if head == "or":
        return Disj(tuple(_formula(a) for a in rest)) if len(rest) != 1 else _formula(rest[0])
    if head == "implies" and len(rest) == 2:
        return Implies(_formula(rest[0]), _formula(rest[1]))
    if head == "iff" and len(rest) == 2:
        return Iff(_formula(rest[0]), _formula(rest[1]))
    if head in ("exists", "forall") and len(rest) == 2 and isinstance(rest[0], list) and rest[0]:
        decl = rest[0]
        if not isinstance(decl[0], str) or not all(isinstance(x, str) for x in decl):
            raise ArithError(f"malformed declaration {decl!r}")
        cls = Exists if head == "exists" else Forall
        return cls(decl[0], _type(decl[1:]), _formula(rest[1]))
    raise ArithError(f"unknown or malformed form {head!r}")


# ---------------------------------------------------------------- fresh names


class Fresh:
    """Deterministic fresh-name supply avoiding a set of taken names."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self.counters: dict[str, int] = {}

    def __call__(self, base: str) -> str:
        k = self.counters.get(base, 0)
        while True:
            k += 1
            name = f"{base}{k}"
            if name not in self.taken:
                self.counters[base] = k
                self.taken.add(name)
                return name


def _rename_term(t: Term, m: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(m.get(t.name, t.name))
    if isinstance(t, Plus):
        return Plus(_rename_term(t.a, m), _rename_term(t.b, m))
    if isinstance(t, Times):
        return Times(_rename_term(t.a, m), _rename_term(t.b, m))
    if isinstance(t, App):
        return App(m.get(t.fn, t.fn), tuple(_rename_term(a, m) for a in t.args))
    return t


def rename_free(f: AFormula, m: Mapping[str, str]) -> AFormula:
    """Rename free occurrences (no capture checks: callers pass fresh targets)."""
    if isinstance(f, Quant):
        inner = {k: v for k, v in m.items() if k != f.var}
        return with_children(f, [rename_free(f.body, inner)])
    if isinstance(f, Rel):
        return Rel(m.get(f.name, f.name), tuple(_rename_term(a, m) for a in f.args))
    if isinstance(f, HO):
        return HO(m.get(f.name, f.name), tuple(m.get(a, a) for a in f.args))
    if isinstance(f, (Eq, Lt, Le)):
        return with_atom_terms(f, [_rename_term(a, m) for a in atom_terms(f)])
    return with_children(f, [rename_free(c, m) for c in children(f)])


def rename_apart(f: AFormula) -> AFormula:
    """Give every binder a distinct name, also distinct from free names."""
    free = free_vars(f)
    fresh = Fresh(all_names(f))
    used: set[str] = set(free)

    def walk(g: AFormula, m: dict[str, str]) -> AFormula:
        if isinstance(g, Quant):
            name = g.var
            if name in used:
                name = fresh(g.var + "_")
            used.add(name)
            inner = dict(m)
            inner[g.var] = name
            return type(g)(name, g.type, walk(g.body, inner))
        if isinstance(g, ATOMS):
            return rename_free(g, m)
        return with_children(g, [walk(c, m) for c in children(g)])

    return walk(f, {})


# ---------------------------------------------------------------- prenex


def _has_quantifier(f: AFormula) -> bool:
    return isinstance(f, Quant) or any(_has_quantifier(c) for c in children(f))


def _expand_connectives(f: AFormula) -> AFormula:
    """Rewrite -> and <-> into not/and/or wherever a quantifier sits below."""
    kids = [_expand_connectives(c) for c in children(f)]
    if isinstance(f, Implies) and _has_quantifier(f):
        return Disj((Not(kids[0]), kids[1]))
    if isinstance(f, Iff) and _has_quantifier(f):
        a, b = kids
        return Conj((Disj((Not(a), b)), Disj((Not(b), a))))
    return with_children(f, kids)


def _pull(f: AFormula) -> tuple[list[tuple[type, str, ArithType]], AFormula]:
    if isinstance(f, Quant):
        pre, mat = _pull(f.body)
        return [(type(f), f.var, f.type)] + pre, mat
    if isinstance(f, Not):
        pre, mat = _pull(f.a)
        flipped = [(Forall if q is Exists else Exists, v, t) for q, v, t in pre]
        return flipped, Not(mat)
    if isinstance(f, (Conj, Disj)):
        pre: list = []
        mats = []
        for c in f.items:
            p, m = _pull(c)
            pre += p
            mats.append(m)
        return pre, type(f)(tuple(mats))
    return [], f


def prenex(f: AFormula) -> AFormula:
    """Equivalent prenex formula with pairwise distinct bound variables."""
    g = rename_apart(_expand_connectives(f))
    pre, mat = _pull(g)
    for q, v, t in reversed(pre):
        mat = q(v, t, mat)
    return mat


def split_prefix(f: AFormula) -> tuple[list[tuple[type, str, ArithType]], AFormula]:
    pre = []
    while isinstance(f, Quant):
        pre.append((type(f), f.var, f.type))
        f = f.body
    return pre, f


# ---------------------------------------------------------------- pairing

UINT64 = 1 << 64


def cantor_pair(n: int, m: int) -> int:
    if n < 0 or m < 0:
        raise ValueError("pairing is defined on naturals")
    v = ((n + m) ** 2 + 3 * n + m) // 2
    if v >= UINT64:
        raise OverflowError("pair exceeds 64 bits")
    return v


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    n = z - w * (w + 1) // 2
    return n, w - n


def cantor_tuple(values: Sequence[int]) -> int:
    if not 1 <= len(values) <= 3:
        raise ValueError("tuples of length 1 to 3 only")
    acc = values[0]
    for v in values[1:]:
        acc = cantor_pair(acc, v)
    return acc


def cantor_untuple(length: int, z: int) -> tuple[int, ...]:
    if not 1 <= length <= 3:
        raise ValueError("tuples of length 1 to 3 only")
    out: list[int] = []
    for _ in range(length - 1):
        z, last = cantor_unpair(z)
        out.append(last)
    out.append(z)
    return tuple(reversed(out))


def set_pair(sets: Sequence[Iterable[int]]) -> frozenset[int]:
    k = len(sets)
    return frozenset(k * n + i for i, s in enumerate(sets) for n in s)


def set_unpair(b: Iterable[int], k: int) -> tuple[frozenset[int], ...]:
    out: list[set[int]] = [set() for _ in range(k)]
    for m in b:
        out[m % k].add(m // k)
    return tuple(frozenset(s) for s in out)


def psi_2(t1: Term, t2: Term, t: Term) -> AFormula:
    """Graph of the pairing polynomial: 2t = (t1+t2)(t1+t2) + 3 t1 + t2."""
    s = Plus(t1, t2)
    return Eq(Times(numeral(2), t), Plus(Plus(Times(s, s), Times(numeral(3), t1)), t2))


def psi_tuple(ts: Sequence[Term], t: Term, fresh: Fresh) -> AFormula:
    """Graph of the iterated pairing over ts, chained through fresh intermediates."""
    if len(ts) == 1:
        return Eq(ts[0], t)
    inter = [fresh("_pt") for _ in range(len(ts) - 2)]
    cur: Term = ts[0]
    parts = []
    for i, nxt in enumerate(ts[1:]):
        out: Term = Var(inter[i]) if i < len(inter) else t
        parts.append(psi_2(cur, nxt, out))
        cur = out
    return exists([(v, FO) for v in inter], conj(*parts))


# ---------------------------------------------------------------- normal form


def _binder_types(f: AFormula) -> dict[str, ArithType]:
    out: dict[str, ArithType] = {}

    def walk(g: AFormula) -> None:
        if isinstance(g, Quant):
            out[g.var] = g.type
        for c in children(g):
            walk(c)

    walk(f)
    return out


def _map_atoms(f: AFormula, fn_: Callable[[AFormula], AFormula],
               on_quant: Callable[[AFormula, AFormula], AFormula] | None = None) -> AFormula:
    if isinstance(f, ATOMS):
        return fn_(f)
    kids = [_map_atoms(c, fn_, on_quant) for c in children(f)]
    g = with_children(f, kids)
    if on_quant is not None and isinstance(f, Quant):
        return on_quant(f, g)
    return g


def _find_innermost_app(t: Term) -> App | None:
    for c in term_children(t):
        found = _find_innermost_app(c)
        if found is not None:
            return found
    return t if isinstance(t, App) else None


def _replace_term(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    if isinstance(t, Plus):
        return Plus(_replace_term(t.a, old, new), _replace_term(t.b, old, new))
    if isinstance(t, Times):
        return Times(_replace_term(t.a, old, new), _replace_term(t.b, old, new))
    if isinstance(t, App):
        return App(t.fn, tuple(_replace_term(a, old, new) for a in t.args))
    return t


def functions_to_graphs(f: AFormula, fresh: Fresh | None = None) -> AFormula:
    """Replace quantified functions by total functional relations."""
    fresh = fresh or Fresh(all_names(f))

    def flatten(atom: AFormula) -> AFormula:
        for t in atom_terms(atom):
            app = _find_innermost_app(t)
            if app is not None:
                y = fresh("_fy")
                replaced = with_atom_terms(atom, [_replace_term(s, app, Var(y)) for s in atom_terms(atom)])
                return Exists(y, FO, conj(Rel(app.fn, app.args + (Var(y),)), flatten(replaced)))
        return atom

    def on_quant(orig: AFormula, g: AFormula) -> AFormula:
        if not orig.type.function:
            return g
        n = orig.type.arity
        xs = [fresh("_fx") for _ in range(n)]
        y, y2 = fresh("_fy"), fresh("_fy")
        xv = tuple(Var(x) for x in xs)
        total = forall([(x, FO) for x in xs], Exists(y, FO, Rel(orig.var, xv + (Var(y),))))
        func = forall(
            [(x, FO) for x in xs] + [(y, FO), (y2, FO)],
            Implies(conj(Rel(orig.var, xv + (Var(y),)), Rel(orig.var, xv + (Var(y2),))), Eq(Var(y), Var(y2))),
        )
        graph = rel(n + 1)
        if isinstance(orig, Exists):
            return Exists(orig.var, graph, conj(total, func, g.body))
        return Forall(orig.var, graph, Implies(conj(total, func), g.body))

    return _map_atoms(f, flatten, on_quant)


def pair_second_order(f: AFormula, fresh: Fresh | None = None) -> AFormula:
    """Make every relation variable unary by pairing its arguments."""
    fresh = fresh or Fresh(all_names(f))
    types = _binder_types(f)

    def atom(a: AFormula) -> AFormula:
        if isinstance(a, Rel) and len(a.args) >= 2:
            x = fresh("_px")
            return Exists(x, FO, conj(psi_tuple(a.args, Var(x), fresh), Rel(a.name, (Var(x),))))
        return a

    def on_quant(orig: AFormula, g: AFormula) -> AFormula:
        t = orig.type
        if t.order == 2 and not t.function and t.arity >= 2:
            return type(g)(g.var, rel(1), g.body)
        if t.order == 3:
            return type(g)(g.var, third(*([1] * len(t.args))), g.body)
        return g

    del types
    return _map_atoms(f, atom, on_quant)


def theta_k(args: Sequence[str], b: str, fresh: Fresh) -> AFormula:
    """B = pairing of the unary sets args (member n of the i-th set goes to k*n+i)."""
    k = len(args)
    m, n = fresh("_tm"), fresh("_tn")
    cases = [
        conj(Rel(a, (Var(n),)), Eq(Var(m), Plus(Times(numeral(k), Var(n)), numeral(i))))
        if i else conj(Rel(a, (Var(n),)), Eq(Var(m), Times(numeral(k), Var(n))))
        for i, a in enumerate(args)
    ]
    return Forall(m, FO, Iff(Rel(b, (Var(m),)), Exists(n, FO, disj(*cases))))


def pair_third_order(f: AFormula, fresh: Fresh | None = None) -> AFormula:
    """Make every third-order variable unary via set pairing."""
    fresh = fresh or Fresh(all_names(f))

    def atom(a: AFormula) -> AFormula:
        if isinstance(a, HO) and len(a.args) >= 2:
            b = fresh("_pb")
            return Exists(b, rel(1), conj(theta_k(a.args, b, fresh), HO(a.name, (b,))))
        return a

    def on_quant(orig: AFormula, g: AFormula) -> AFormula:
        if orig.type.order == 3 and len(orig.type.args) >= 2:
            return type(g)(g.var, third(1), g.body)
        return g

    return _map_atoms(f, atom, on_quant)


class _Builtins:
    """Definitions of zero, one, successor, + and x from < alone."""

    def __init__(self, fresh: Fresh):
        self.fresh = fresh
        self.plus: str | None = None
        self.times: str | None = None

    def zero(self, v: str) -> AFormula:
        u = self.fresh("_u")
        return Forall(u, FO, Not(Lt(Var(u), Var(v))))

    def eq(self, a: str, b: str) -> AFormula:
        return conj(Not(Lt(Var(a), Var(b))), Not(Lt(Var(b), Var(a))))

    def succ(self, a: str, b: str) -> AFormula:
        w = self.fresh("_u")
        return conj(Lt(Var(a), Var(b)), Not(Exists(w, FO, conj(Lt(Var(a), Var(w)), Lt(Var(w), Var(b))))))

    def one(self, v: str) -> AFormula:
        u = self.fresh("_u")
        return Exists(u, FO, conj(self.zero(u), self.succ(u, v)))

    def need_plus(self) -> str:
        if self.plus is None:
            self.plus = self.fresh("_plus")
        return self.plus

    def need_times(self) -> str:
        self.need_plus()
        if self.times is None:
            self.times = self.fresh("_times")
        return self.times

    def plus_def(self) -> AFormula:
        P = self.plus
        x, y, z, y1, z1 = (self.fresh("_d") for _ in range(5))
        base = conj(self.zero(y), self.eq(x, z))
        step = exists([(y1, FO), (z1, FO)], conj(self.succ(y1, y), self.succ(z1, z), R(P, x, y1, z1)))
        return forall([(x, FO), (y, FO), (z, FO)], Iff(R(P, x, y, z), disj(base, step)))

    def times_def(self) -> AFormula:
        M, P = self.times, self.plus
        x, y, z, y1, w = (self.fresh("_d") for _ in range(5))
        base = conj(self.zero(y), self.zero(z))
        step = exists([(y1, FO), (w, FO)], conj(self.succ(y1, y), R(M, x, y1, w), R(P, w, x, z)))
        return forall([(x, FO), (y, FO), (z, FO)], Iff(R(M, x, y, z), disj(base, step)))

    def flatten(self, t: Term, defs: list[tuple[str, AFormula]]) -> str:
        """Variable naming the value of t; defining conjuncts appended to defs."""
        if isinstance(t, Var):
            return t.name
        if isinstance(t, App):
            raise ArithError("function application left after graph conversion")
        v = self.fresh("_v")
        if isinstance(t, Zero):
            defs.append((v, self.zero(v)))
        elif isinstance(t, One):
            defs.append((v, self.one(v)))
        else:
            a = self.flatten(t.a, defs)
            b = self.flatten(t.b, defs)
            rel_name = self.need_plus() if isinstance(t, Plus) else self.need_times()
            defs.append((v, R(rel_name, a, b, v)))
        return v

    def atom(self, a: AFormula) -> AFormula:
        if isinstance(a, (Const, HO)):
            return a
        defs: list[tuple[str, AFormula]] = []
        names = [self.flatten(t, defs) for t in atom_terms(a)]
        if isinstance(a, Eq):
            core = self.eq(*names)
        elif isinstance(a, Le):
            core = Not(Lt(Var(names[1]), Var(names[0])))
        elif isinstance(a, Lt):
            core = Lt(Var(names[0]), Var(names[1]))
        else:
            core = Rel(a.name, tuple(Var(n) for n in names))
        if not defs:
            return core
        return exists([(v, FO) for v, _ in defs], conj(*[d for _, d in defs], core))


def eliminate_builtins(f: AFormula, fresh: Fresh | None = None) -> AFormula:
    """Express =, <=, 0, 1, + and x through < and quantified graph relations."""
    b = _Builtins(fresh or Fresh(all_names(f)))
    g = _map_atoms(f, b.atom)
    if b.times is not None:
        g = Exists(b.plus, rel(3), Exists(b.times, rel(3), conj(b.plus_def(), b.times_def(), g)))
    elif b.plus is not None:
        g = Exists(b.plus, rel(3), conj(b.plus_def(), g))
    return g


def shape_violations(f: AFormula) -> list[str]:
    """Reasons why f is not in the arity-reduced prenex normal form (empty if it is)."""
    out: list[str] = []
    pre, mat = split_prefix(f)
    types: dict[str, ArithType] = {}
    for _, v, t in pre:
        if v in types:
            out.append(f"variable {v} bound twice")
        types[v] = t
        if t.function:
            out.append(f"function variable {v}")
        elif t.order == 2 and t.arity > 3:
            out.append(f"relation {v} of arity {t.arity}")
        elif t.order == 3 and t.args != (1,):
            out.append(f"third-order variable {v} of type {t.args}")
    if free_vars(f):
        out.append(f"free variables {sorted(free_vars(f))}")

    def is_var(t: Term, order_ok: Callable[[ArithType], bool]) -> bool:
        return isinstance(t, Var) and t.name in types and order_ok(types[t.name])

    def walk(g: AFormula) -> None:
        if isinstance(g, Quant):
            out.append("quantifier inside the matrix")
            return
        if isinstance(g, Lt):
            if not (is_var(g.a, lambda t: t == FO) and is_var(g.b, lambda t: t == FO)):
                out.append(f"non-variable comparison {to_sexpr(g)}")
        elif isinstance(g, Rel):
            t = types.get(g.name)
            if t is None or t.order != 2 or t.function or t.arity != len(g.args) or len(g.args) > 3:
                out.append(f"bad relation atom {to_sexpr(g)}")
            elif not all(is_var(a, lambda t: t == FO) for a in g.args):
                out.append(f"non-variable argument in {to_sexpr(g)}")
        elif isinstance(g, HO):
            t = types.get(g.name)
            if t is None or t.args != (1,) or len(g.args) != 1 or types.get(g.args[0]) != rel(1):
                out.append(f"bad third-order atom {to_sexpr(g)}")
        elif isinstance(g, (Eq, Le, Const)):
            out.append(f"disallowed atom {to_sexpr(g)}")
        for c in children(g):
            walk(c)

    walk(mat)
    return out


def shape_check(f: AFormula) -> bool:
    return not shape_violations(f)


def normalize_arity(f: AFormula) -> AFormula:
    """Prenex normal form whose atoms are x<y, A(x1..xl) with l <= 3, and a(A) with unary a, A."""
    if not is_closed(f):
        raise ArithError(f"normal form needs a closed formula; free: {sorted(free_vars(f))}")
    errs = well_formed(f, {})
    if errs:
        raise ArithError("; ".join(errs))
    g = prenex(f)
    fresh = Fresh(all_names(g))
    g = functions_to_graphs(g, fresh)
    g = pair_second_order(g, fresh)
    g = pair_third_order(g, fresh)
    g = eliminate_builtins(g, fresh)
    return prenex(g)


# ---------------------------------------------------------------- bounded evaluation

MAX_ENUMERATION = 1 << 16


@dataclass
class BoundedEvaluator:
    """Truth under bounded relativization.

    Number quantifiers range over [0, fo_bound) (or aux_bound for names
    starting with '_'), relation quantifiers over subsets of
    [0, so_bound)^arity.  Terms are evaluated exactly.  Relation values in
    env may be any container supporting ``in`` on argument tuples.

    ``witnesses(name, type, env)`` may return a finite candidate domain for
    a quantified variable (None falls back to enumeration).  This is only
    sound when the true witness is provably among the candidates, as for
    relations pinned down by a defining conjunct.
    """

    fo_bound: int
    so_bound: int
    aux_bound: int | None = None
    max_quantifiers: int = 6
    max_enumeration: int = MAX_ENUMERATION
    witnesses: Callable[[str, ArithType, dict], Iterable[object] | None] | None = None
    steps: int = field(default=0)

    def run(self, f: AFormula, env: Mapping[str, object] | None = None) -> bool:
        if quantifier_depth(f) > self.max_quantifiers:
            raise CapExceeded(f"quantifier nesting {quantifier_depth(f)} exceeds {self.max_quantifiers}")
        return self._eval(f, dict(env or {}))

    def _term(self, t: Term, env: dict) -> int:
        if isinstance(t, Var):
            if t.name not in env:
                raise ArithError(f"unbound variable {t.name}")
            return env[t.name]
        if isinstance(t, Zero):
            return 0
        if isinstance(t, One):
            return 1
        if isinstance(t, Plus):
            return self._term(t.a, env) + self._term(t.b, env)
        if isinstance(t, Times):
            return self._term(t.a, env) * self._term(t.b, env)
        if isinstance(t, App):
            fval = env[t.fn]
            key = tuple(self._term(a, env) for a in t.args)
            return fval(*key) if callable(fval) else fval.get(key, 0)
        raise ArithError(f"unknown term {t!r}")

    def _domain(self, name: str, typ: ArithType, env: dict) -> Iterable[object]:
        if self.witnesses is not None:
            supplied = self.witnesses(name, typ, env)
            if supplied is not None:
                return supplied
        if typ.order == 3:
            raise ThirdOrderUnsupported(f"cannot quantify third-order variable {name}")
        if typ.order == 1:
            bound = self.aux_bound if (self.aux_bound is not None and name.startswith("_")) else self.fo_bound
            return range(bound)
        points = list(itertools.product(range(self.so_bound), repeat=typ.arity))
        if typ.function:
            size = self.fo_bound ** len(points)
            if size > self.max_enumeration:
                raise CapExceeded(f"{size} candidate functions for {name}")
            return (dict(zip(points, vals)) for vals in itertools.product(range(self.fo_bound), repeat=len(points)))
        if len(points) > 16 or (1 << len(points)) > self.max_enumeration:
            raise CapExceeded(f"2^{len(points)} candidate relations for {name}")
        return (
            frozenset(p for i, p in enumerate(points) if mask >> i & 1) for mask in range(1 << len(points))
        )

    def _eval(self, f: AFormula, env: dict) -> bool:
        self.steps += 1
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Eq):
            return self._term(f.a, env) == self._term(f.b, env)
        if isinstance(f, Lt):
            return self._term(f.a, env) < self._term(f.b, env)
        if isinstance(f, Le):
            return self._term(f.a, env) <= self._term(f.b, env)
        if isinstance(f, Rel):
            return tuple(self._term(a, env) for a in f.args) in env[f.name]
        if isinstance(f, HO):
            return tuple(env[a] for a in f.args) in env[f.name]
        if isinstance(f, Not):
            return not self._eval(f.a, env)
        if isinstance(f, Conj):
            return all(self._eval(c, env) for c in f.items)
        if isinstance(f, Disj):
            return any(self._eval(c, env) for c in f.items)
        if isinstance(f, Implies):
            return (not self._eval(f.a, env)) or self._eval(f.b, env)
        if isinstance(f, Iff):
            return self._eval(f.a, env) == self._eval(f.b, env)
        if isinstance(f, Quant):
            want = isinstance(f, Exists)
            saved = env.get(f.var, _MISSING)
            try:
                for value in list(self._domain(f.var, f.type, env)):
                    env[f.var] = value
                    if self._eval(f.body, env) == want:
                        return want
                return not want
            finally:
                if saved is _MISSING:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        raise ArithError(f"unknown formula {f!r}")


_MISSING = object()


def bounded_eval(f: AFormula, first_order_bound: int, second_order_support_bound: int | None = None,
                 env: Mapping[str, object] | None = None, aux_bound: int | None = None,
                 max_quantifiers: int = 6) -> bool:
    so = first_order_bound if second_order_support_bound is None else second_order_support_bound
    return BoundedEvaluator(first_order_bound, so, aux_bound, max_quantifiers).run(f, env)
