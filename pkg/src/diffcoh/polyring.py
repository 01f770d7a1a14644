"""Homogeneous polynomials, the expression parser, and Groebner normal forms.

Monomials are exponent tuples.  The global monomial order is graded reverse
lexicographic with the declared variable order (first variable largest).

Expression grammar accepted by :func:`parse_poly`::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*        -- "/" only by a nonzero constant
    unary   := ("+" | "-") unary | power
    power   := atom ("^" INTEGER)?
    atom    := INTEGER | IDENT | "(" expr ")"

Juxtaposition (``2x``, ``x y``) is a syntax error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, Sequence

from .exactlinalg import QQ, FieldSpec

Monomial = tuple  # tuple[int, ...]


def grevlex_key(mono: Monomial) -> tuple:
    """Sort key: larger key means larger monomial."""
    return (sum(mono), tuple(-e for e in reversed(mono)))


def homog_basis(n_vars: int, d: int) -> list[Monomial]:
    """All monomials of degree ``d`` in ``n_vars`` variables, largest first."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + (a,), remaining - a, slots - 1)

    if n_vars == 0:
        return [()] if d == 0 else []
    rec((), d, n_vars)
    out.sort(key=grevlex_key, reverse=True)
    return out


def monomials_up_to(n_vars: int, d: int) -> list[Monomial]:
    out = []
    for k in range(d + 1):
        out.extend(homog_basis(n_vars, k))
    return out


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mono_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


class HomogPoly:
    """A homogeneous polynomial: sparse ``{exponent tuple: coefficient}``.

    Instances are treated as immutable.  The zero polynomial has
    ``degree is None``.
    """

    __slots__ = ("terms", "nvars", "field", "degree")

    def __init__(self, terms: Mapping[Monomial, object], nvars: int, field: FieldSpec = QQ):
        clean = {}
        degree = None
        for mono, c in terms.items():
            c = field.convert(c)
            if c == 0:
                continue
            mono = tuple(mono)
            if len(mono) != nvars:
                raise ValueError(f"monomial {mono} has wrong length for {nvars} variables")
            d = sum(mono)
            if degree is None:
                degree = d
            elif d != degree:
                raise ValueError(f"not homogeneous: degrees {degree} and {d}")
            clean[mono] = c
        self.terms = clean
        self.nvars = nvars
        self.field = field
        self.degree = degree

    @classmethod
    def zero(cls, nvars: int, field: FieldSpec = QQ) -> "HomogPoly":
        return cls({}, nvars, field)

    @classmethod
    def monomial(cls, mono: Monomial, coeff=1, field: FieldSpec = QQ) -> "HomogPoly":
        return cls({tuple(mono): coeff}, len(mono), field)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.field == other.field and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.field, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"HomogPoly({format_poly(self)!r})"

    def _combine(self, other: "HomogPoly", sign: int) -> "HomogPoly":
        f = self.field
        out = dict(self.terms)
        for mono, c in other.terms.items():
            v = f.norm(out.get(mono, 0) + sign * c)
            if v:
                out[mono] = v
            else:
                out.pop(mono, None)
        return HomogPoly(out, self.nvars, f)

    def __add__(self, other: "HomogPoly") -> "HomogPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "HomogPoly") -> "HomogPoly":
        return self._combine(other, -1)

    def __neg__(self) -> "HomogPoly":
        return self.scale(-1)

    def scale(self, c) -> "HomogPoly":
        f = self.field
        c = f.convert(c)
        return HomogPoly({m: f.norm(v * c) for m, v in self.terms.items()}, self.nvars, f)

    def mul_monomial(self, mono: Monomial, c=1) -> "HomogPoly":
        f = self.field
        c = f.convert(c)
        return HomogPoly({mono_mul(m, mono): f.norm(v * c) for m, v in self.terms.items()},
                         self.nvars, f)

    def __mul__(self, other):
        if not isinstance(other, HomogPoly):
            return self.scale(other)
        f = self.field
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return HomogPoly({m: f.norm(v) for m, v in out.items()}, self.nvars, f)

    __rmul__ = __mul__

    def sorted_terms(self) -> list[tuple[Monomial, object]]:
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    @property
    def leading_monomial(self) -> Monomial:
        return max(self.terms, key=grevlex_key)

    @property
    def leading_coefficient(self):
        return self.terms[self.leading_monomial]

    def monic(self) -> "HomogPoly":
        if not self.terms:
            return self
        return self.scale(self.field.inv(self.leading_coefficient))


# ---------------------------------------------------------------------------
# printing and parsing


def format_poly(p: HomogPoly, names: Sequence[str] | None = None) -> str:
    """Render ``p`` in the grammar accepted by :func:`parse_poly`."""
    if names is None:
        names = [f"x{i}" for i in range(p.nvars)]
    if not p.terms:
        return "0"
    pieces = []
    for mono, c in p.sorted_terms():
        factors = []
        for name, e in zip(names, mono):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        neg = p.field.is_rational and c < 0
        mag = -c if neg else c
        if mag != 1 or not factors:
            factors.insert(0, str(mag))
        body = "*".join(factors)
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


class PolyParseError(ValueError):
    """Malformed polynomial text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class UnknownVariableError(PolyParseError):
    pass


class InhomogeneousError(PolyParseError):
    def __init__(self, degrees: tuple[int, int]):
        self.degrees = degrees
        super().__init__(f"inhomogeneous expression (degrees {degrees[0]} and {degrees[1]})")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise PolyParseError(f"unexpected character {ch!r}", m.start(3))
            tokens.append(("op", ch, m.start(3)))
        else:
            break
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # Intermediate values are plain dicts {mono: Fraction}; homogeneity is checked at the end.

    def __init__(self, text: str, names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = {name: k for k, name in enumerate(names)}
        self.n = len(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value or tok[0] == "int":
            raise PolyParseError(f"expected {value!r}", tok[2])

    def parse(self) -> dict:
        if self.peek()[0] == "end":
            raise PolyParseError("empty expression", 0)
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolyParseError(f"unexpected token {tok[1]!r} (juxtaposition is not allowed)", tok[2])
        return value

    def expr(self) -> dict:
        value = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            value = _padd(value, rhs, 1 if op == "+" else -1)
        return value

    def term(self) -> dict:
        value = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            pos = self.peek()[2]
            rhs = self.unary()
            if op == "*":
                value = _pmul(value, rhs)
            else:
                zero = (0,) * self.n
                if set(rhs) - {zero}:
                    raise PolyParseError("division by a non-constant", pos)
                c = rhs.get(zero, 0)
                if c == 0:
                    raise PolyParseError("division by zero", pos)
                value = {m: v / c for m, v in value.items()}
        return value

    def unary(self) -> dict:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if tok[1] == "+" else {m: -v for m, v in inner.items()}
        return self.power()

    def power(self) -> dict:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise PolyParseError("exponent must be a non-negative integer", tok[2])
            k = int(tok[1])
            result = {(0,) * self.n: Fraction(1)}
            for _ in range(k):
                result = _pmul(result, base)
            return result
        return base

    def atom(self) -> dict:
        kind, value, pos = self.take()
        if kind == "int":
            return {(0,) * self.n: Fraction(int(value))} if int(value) else {}
        if kind == "ident":
            if value not in self.names:
                raise UnknownVariableError(f"unknown variable {value!r}", pos)
            mono = [0] * self.n
            mono[self.names[value]] = 1
            return {tuple(mono): Fraction(1)}
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            raise PolyParseError("unexpected end of input", pos)
        raise PolyParseError(f"unexpected token {value!r}", pos)


def _padd(a: dict, b: dict, sign: int) -> dict:
    out = dict(a)
    for m, v in b.items():
        s = out.get(m, 0) + sign * v
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul(m1, m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def parse_poly(text: str, spec: "RingSpec | Sequence[str]", field: FieldSpec | None = None) -> HomogPoly:
    """Parse ``text`` into a homogeneous polynomial.

    ``spec`` is a :class:`RingSpec` or a plain list of variable names (then
    ``field`` defaults to Q).
    """
    if isinstance(spec, RingSpec):
        names, field = spec.vars, spec.field
    else:
        names, field = list(spec), field or QQ
    raw = _Parser(text, names).parse()
    converted = {}
    for m, v in raw.items():
        try:
            c = field.convert(v)
        except ZeroDivisionError as exc:
            raise PolyParseError(str(exc)) from None
        if c:
            converted[m] = c
    degrees = []
    for m in sorted(converted, key=grevlex_key, reverse=True):
        d = sum(m)
        if d not in degrees:
            degrees.append(d)
    if len(degrees) > 1:
        raise InhomogeneousError((degrees[0], degrees[1]))
    return HomogPoly(converted, len(names), field)


# ---------------------------------------------------------------------------
# Groebner bases


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced Groebner basis: monic, autoreduced, sorted by leading monomial."""

    elements: tuple[HomogPoly, ...]

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def leading_monomials(self) -> list[Monomial]:
        return [g.leading_monomial for g in self.elements]


def _reduce(p: HomogPoly, basis: Sequence[HomogPoly]) -> HomogPoly:
    """Full multivariate division remainder of ``p`` by monic ``basis``."""
    f = p.field
    work = dict(p.terms)
    remainder = {}
    leads = [(g.leading_monomial, g) for g in basis]
    while work:
        mono = max(work, key=grevlex_key)
        c = work.pop(mono)
        for lm, g in leads:
            if mono_divides(lm, mono):
                t = mono_div(mono, lm)
                for gm, gc in g.terms.items():
                    if gm == lm:
                        continue
                    m = mono_mul(gm, t)
                    v = f.norm(work.get(m, 0) - c * gc)
                    if v:
                        work[m] = v
                    else:
                        work.pop(m, None)
                break
        else:
            remainder[mono] = c
    return HomogPoly(remainder, p.nvars, f)


def _spoly(f: HomogPoly, g: HomogPoly) -> HomogPoly:
    lf, lg = f.leading_monomial, g.leading_monomial
    lcm = mono_lcm(lf, lg)
    return f.mul_monomial(mono_div(lcm, lf)) - g.mul_monomial(mono_div(lcm, lg))


def buchberger(gens: Iterable[HomogPoly]) -> GroebnerBasis:
    """Reduced Groebner basis (grevlex) via Buchberger with the coprime criterion."""
    basis = [g.monic() for g in gens if g]
    if not basis:
        return GroebnerBasis(())
    pairs = set(combinations(range(len(basis)), 2))
    while pairs:
        i, j = min(pairs, key=lambda ij: (
            grevlex_key(mono_lcm(basis[ij[0]].leading_monomial, basis[ij[1]].leading_monomial)), ij))
        pairs.discard((i, j))
        li, lj = basis[i].leading_monomial, basis[j].leading_monomial
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue
        r = _reduce(_spoly(basis[i], basis[j]), basis)
        if r:
            basis.append(r.monic())
            k = len(basis) - 1
            pairs.update((a, k) for a in range(k))
    # minimize, then autoreduce
    minimal = []
    for k, g in enumerate(basis):
        lm = g.leading_monomial
        dominated = False
        for l, h in enumerate(basis):
            if l == k:
                continue
            hl = h.leading_monomial
            if mono_divides(hl, lm) and (hl != lm or l < k):
                dominated = True
                break
        if not dominated:
            minimal.append(g)
    reduced = []
    for k, g in enumerate(minimal):
        others = minimal[:k] + minimal[k + 1:]
        lm = g.leading_monomial
        tail = HomogPoly({m: c for m, c in g.terms.items() if m != lm}, g.nvars, g.field)
        r = _reduce(tail, others)
        reduced.append(HomogPoly({lm: 1}, g.nvars, g.field) + r)
    reduced.sort(key=lambda g: grevlex_key(g.leading_monomial), reverse=True)
    return GroebnerBasis(tuple(reduced))


def normal_form(p: HomogPoly, gb: GroebnerBasis) -> HomogPoly:
    """Remainder of ``p`` on division by ``gb``; zero iff ``p`` lies in the ideal."""
    return _reduce(p, gb.elements)


# ---------------------------------------------------------------------------
# the graded quotient ring


@dataclass(frozen=True)
class RingSpec:
    """A graded quotient ``field[vars] / (relations)``, all variables of degree 1."""

    field: FieldSpec
    vars: tuple[str, ...]
    relations: tuple[HomogPoly, ...] = ()
    assert_smooth_proj: bool = False
    groebner: GroebnerBasis = dc_field(init=False, compare=False, repr=False)
    _cache: dict = dc_field(init=False, compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        rels = []
        for r in self.relations:
            if isinstance(r, str):
                r = parse_poly(r, list(self.vars), self.field)
            if r.nvars != len(self.vars):
                raise ValueError("relation has the wrong number of variables")
            if r.field != self.field:
                raise ValueError("relation is defined over a different field")
            if r.is_zero():
                continue
            if r.degree < 1:
                raise ValueError("relations must have degree >= 1")
            rels.append(r)
        object.__setattr__(self, "relations", tuple(rels))
        object.__setattr__(self, "groebner", buchberger(rels))

    @classmethod
    def from_strings(cls, field: FieldSpec | str, vars: Sequence[str],
                     relations: Sequence[str] = (), assert_smooth_proj: bool = False) -> "RingSpec":
        if isinstance(field, str):
            field = parse_field(field)
        return cls(field, tuple(vars), tuple(parse_poly(r, list(vars), field) for r in relations),
                   assert_smooth_proj)

    def __getstate__(self):
        return {"field": self.field, "vars": self.vars, "relations": self.relations,
                "assert_smooth_proj": self.assert_smooth_proj, "groebner": self.groebner}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_cache", {})

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def parse(self, text: str) -> HomogPoly:
        return parse_poly(text, self)

    def format(self, p: HomogPoly) -> str:
        return format_poly(p, self.vars)

    def poly(self, terms: Mapping[Monomial, object]) -> HomogPoly:
        return HomogPoly(terms, self.nvars, self.field)

    def _nf_table(self, d: int) -> dict:
        """Normal forms of every degree-d monomial, keyed by monomial."""
        cache = self._cache.setdefault("nf", {})
        table = cache.get(d)
        if table is not None:
            return table
        f = self.field
        gb = self.groebner.elements
        leads = [(g.leading_monomial, g) for g in gb]
        table = {}
        for mono in reversed(homog_basis(self.nvars, d)):  # ascending order
            for lm, g in leads:
                if mono_divides(lm, mono):
                    t = mono_div(mono, lm)
                    acc: dict = {}
                    for gm, gc in g.terms.items():
                        if gm == lm:
                            continue
                        for sm, sc in table[mono_mul(gm, t)].items():
                            v = f.norm(acc.get(sm, 0) - gc * sc)
                            if v:
                                acc[sm] = v
                            else:
                                acc.pop(sm, None)
                    table[mono] = acc
                    break
            else:
                table[mono] = {mono: 1}
        cache[d] = table
        return table

    def nf_monomial(self, mono: Monomial) -> dict:
        return self._nf_table(sum(mono))[tuple(mono)]

    def nf_terms(self, terms: Mapping[Monomial, object]) -> dict:
        """Normal form of a homogeneous term dict, as a term dict."""
        f = self.field
        out: dict = {}
        for mono, c in terms.items():
            if not c:
                continue
            for sm, sc in self.nf_monomial(mono).items():
                v = f.norm(out.get(sm, 0) + c * sc)
                if v:
                    out[sm] = v
                else:
                    out.pop(sm, None)
        return out

    def normal_form(self, p: HomogPoly) -> HomogPoly:
        if not p.terms:
            return p
        return HomogPoly(self.nf_terms(p.terms), self.nvars, self.field)

    def standard_monomials(self, d: int) -> list[Monomial]:
        """Monomials of degree d outside the leading-term ideal, largest first."""
        if d < 0:
            return []
        cache = self._cache.setdefault("std", {})
        if d not in cache:
            leads = self.groebner.leading_monomials
            cache[d] = [m for m in homog_basis(self.nvars, d)
                        if not any(mono_divides(lm, m) for lm in leads)]
        return cache[d]

    def quotient_piece_dim(self, d: int) -> int:
        return quotient_piece_dim(self, d)


def quotient_piece_dim(spec: RingSpec, d: int) -> int:
    """``dim_k R_d``: the number of standard monomials of degree ``d``."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    return len(spec.standard_monomials(d))


def hypersurface_hilbert(n_vars: int, rel_degree: int, d: int) -> int:
    """Closed-form ``dim R_d`` for one relation of degree ``rel_degree``."""
    total = comb(d + n_vars - 1, n_vars - 1)
    k = d - rel_degree
    return total - (comb(k + n_vars - 1, n_vars - 1) if k >= 0 else 0)


def parse_field(text: str) -> FieldSpec:
    """``"Q"`` or ``"F<p>"`` (e.g. ``"F5"``)."""
    text = text.strip()
    if text in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"F_?(\d+)", text)
    if m:
        return FieldSpec.prime(int(m.group(1)))
    raise ValueError(f"unknown field {text!r}; expected 'Q' or 'F<p>'")
