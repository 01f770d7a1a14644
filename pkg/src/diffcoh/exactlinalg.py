"""Exact rank, nullspace and span computations over Q and prime fields.

Matrices are stored sparsely as ``{(row, col): value}``.  Rational scalars are
Python ints or :class:`fractions.Fraction`; prime-field scalars are ints in
``range(p)``.  No floating point is used anywhere.

Elimination first splits a matrix into the connected components of its
row/column incidence graph and eliminates each block on its own.  The
matrices produced elsewhere in the package are block diagonal with respect
to a torus or finite-group grading, so this is where most of the speed
comes from.  Inside a block, pivots follow a Markowitz-style rule: sparsest
row first, then the column with fewest entries, then (over Q) the smallest
absolute value.  Over Q rows are kept as primitive integer vectors
(fraction-free elimination with content removal).
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping, Sequence

Row = dict  # col -> scalar


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (bases up to 41, exact for n < 3.3e24)."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The base field: ``kind`` is ``"Q"`` or ``"Fp"`` (with modulus ``p``)."""

    kind: str = "Q"
    p: int = 0

    def __post_init__(self):
        if self.kind == "Q":
            if self.p != 0:
                raise ValueError("the rational field takes no modulus")
        elif self.kind == "Fp":
            if self.p < 2 or not is_prime(self.p):
                raise ValueError(f"modulus {self.p} is not prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls("Q")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("Fp", p)

    @property
    def is_rational(self) -> bool:
        return self.kind == "Q"

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def name(self) -> str:
        return "Q" if self.kind == "Q" else f"F{self.p}"

    def __str__(self) -> str:
        return self.name

    def convert(self, x) -> int | Fraction:
        """Map an int or Fraction into the field."""
        if self.kind == "Q":
            if isinstance(x, Fraction):
                return x.numerator if x.denominator == 1 else x
            return int(x)
        if isinstance(x, Fraction):
            den = x.denominator % self.p
            if den == 0:
                raise ZeroDivisionError(f"denominator {x.denominator} vanishes mod {self.p}")
            return x.numerator * pow(den, -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        """Canonical form of an arithmetic result already in the field."""
        if self.kind == "Q":
            if isinstance(x, Fraction) and x.denominator == 1:
                return x.numerator
            return x
        return x % self.p

    def inv(self, x):
        if self.kind == "Q":
            return self.norm(Fraction(1) / x)
        return pow(x, -1, self.p)

    def div(self, a, b):
        if self.kind == "Q":
            return self.norm(Fraction(a) / b)
        return a * pow(b, -1, self.p) % self.p


QQ = FieldSpec.rationals()


@dataclass(frozen=True)
class ExactMatrix:
    """Sparse matrix over a :class:`FieldSpec`; zero entries are never stored."""

    rows: int
    cols: int
    entries: Mapping[tuple[int, int], object] = dc_field(default_factory=dict)
    field: FieldSpec = QQ

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
            v = self.field.convert(v)
            if v != 0:
                clean[(i, j)] = v
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], field: FieldSpec = QQ) -> "ExactMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        entries = {(i, j): v for i, row in enumerate(data) for j, v in enumerate(row) if v != 0}
        return cls(nrows, ncols, entries, field)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, object]], cols: int,
                  field: FieldSpec = QQ) -> "ExactMatrix":
        entries = {(i, j): v for i, row in enumerate(rows) for j, v in row.items()}
        return cls(len(rows), cols, entries, field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec = QQ) -> "ExactMatrix":
        return cls(rows, cols, {}, field)

    @classmethod
    def identity(cls, n: int, field: FieldSpec = QQ) -> "ExactMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)}, field)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows,
                           {(j, i): v for (i, j), v in self.entries.items()}, self.field)

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def to_dense(self) -> list[list]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def apply(self, vec: Sequence) -> list:
        """Return ``M @ vec``."""
        out = [0] * self.rows
        for (i, j), v in self.entries.items():
            if vec[j]:
                out[i] += v * vec[j]
        return [self.field.norm(x) for x in out]

    @property
    def nnz(self) -> int:
        return len(self.entries)


# ---------------------------------------------------------------------------
# block decomposition


def _components(rows: Sequence[Row]) -> list[list[int]]:
    """Group row indices by connected component of the column-sharing graph."""
    parent: dict[int, int] = {}

    def find(c):
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    for row in rows:
        it = iter(row)
        first = next(it, None)
        if first is None:
            continue
        parent.setdefault(first, first)
        r0 = find(first)
        for c in it:
            parent.setdefault(c, c)
            rc = find(c)
            if rc != r0:
                parent[rc] = r0
    groups: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        if row:
            groups.setdefault(find(next(iter(row))), []).append(i)
    return list(groups.values())


# ---------------------------------------------------------------------------
# elimination kernels


def _primitive_int_row(row: Row) -> dict[int, int]:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    out = {c: int(v * den) for c, v in row.items() if v}
    g = reduce(gcd, out.values(), 0)
    if g > 1:
        out = {c: v // g for c, v in out.items()}
    return out


def _eliminate_block(rows: list[dict[int, int]], p: int) -> list[tuple[int, dict[int, int]]]:
    """Right-looking sparse elimination of one block.

    ``p == 0`` means integer rows over Q (fraction-free); otherwise rows hold
    residues mod p.  Rows are consumed.  Returns pivots ``(col, row)`` in
    elimination order; pivot row k has zeros in the pivot columns of all
    pivots before it.
    """
    active: dict[int, dict[int, int]] = {}
    colidx: dict[int, set[int]] = {}
    heap: list[tuple[int, int]] = []
    for rid, row in enumerate(rows):
        if not row:
            continue
        active[rid] = row
        for c in row:
            colidx.setdefault(c, set()).add(rid)
        heap.append((len(row), rid))
    heapq.heapify(heap)
    pivots = []
    while heap:
        length, rid = heapq.heappop(heap)
        row = active.get(rid)
        if row is None or len(row) != length:
            continue
        if p:
            pc = min(row, key=lambda c: (len(colidx[c]), c))
        else:
            pc = min(row, key=lambda c: (len(colidx[c]), abs(row[c]), c))
        del active[rid]
        for c in row:
            colidx[c].discard(rid)
        a = row[pc]
        a_inv = pow(a, -1, p) if p else None
        others = colidx.pop(pc)
        for oid in others:
            orow = active[oid]
            b = orow.pop(pc)
            if p:
                f = b * a_inv % p
                for c, v in row.items():
                    if c == pc:
                        continue
                    nv = (orow.get(c, 0) - f * v) % p
                    if nv:
                        if c not in orow:
                            colidx[c].add(oid)
                        orow[c] = nv
                    elif c in orow:
                        del orow[c]
                        colidx[c].discard(oid)
            else:
                if a != 1:
                    for c in orow:
                        orow[c] *= a
                for c, v in row.items():
                    if c == pc:
                        continue
                    nv = orow.get(c, 0) - b * v
                    if nv:
                        if c not in orow:
                            colidx[c].add(oid)
                        orow[c] = nv
                    elif c in orow:
                        del orow[c]
                        colidx[c].discard(oid)
                g = reduce(gcd, orow.values(), 0)
                if g > 1:
                    for c in orow:
                        orow[c] //= g
            if orow:
                heapq.heappush(heap, (len(orow), oid))
            else:
                del active[oid]
        pivots.append((pc, row))
    return pivots


def _prepare(rows: Iterable[Row], field: FieldSpec, p: int) -> list[dict[int, int]]:
    if p == 0:
        return [_primitive_int_row(r) for r in rows]
    if field.is_rational:
        out = []
        for r in rows:
            conv = {}
            for c, v in r.items():
                if isinstance(v, Fraction):
                    den = v.denominator % p
                    if den == 0:
                        raise ZeroDivisionError("denominator divisible by the chosen prime")
                    v = v.numerator * pow(den, -1, p)
                v %= p
                if v:
                    conv[c] = v
            out.append(conv)
        return out
    return [{c: v % p for c, v in r.items() if v % p} for r in rows]


def _pivots(rows: Sequence[Row], field: FieldSpec, p: int | None = None):
    """Eliminate every block; yields pivots over the modulus actually used."""
    mod = field.p if p is None else p
    prepared = _prepare(rows, field, mod)
    out = []
    for block in _components(prepared):
        out.extend(_eliminate_block([prepared[i] for i in block], mod))
    return out, mod


# ---------------------------------------------------------------------------
# public operations


def _random_primes(count: int, seed: int) -> list[int]:
    rng = random.Random(seed)
    primes = []
    while len(primes) < count:
        q = rng.randrange(2**30, 2**31) | 1
        while not is_prime(q):
            q += 2
        if q not in primes:
            primes.append(q)
    return primes


def rank_of_rows(rows: Sequence[Row], field: FieldSpec = QQ, *, method: str = "exact",
                 n_primes: int = 3, seed: int = 0) -> int:
    """Rank of the matrix whose (sparse) rows are given.

    ``method="multimodular"`` (rational field only) returns the maximum of the
    ranks modulo ``n_primes`` random 31-bit primes.  Each of those is a lower
    bound for the rational rank and equals it for all but finitely many
    primes.  ``method="exact"`` is the certified default.  ``method="bounded"``
    is also exact: it first ranks modulo one prime, and when that lower bound
    already equals ``min(#rows, #columns)`` the rank is settled; otherwise it
    falls back to exact elimination.
    """
    if method == "exact" or not field.is_rational:
        return len(_pivots(rows, field)[0])
    if method == "bounded":
        nonzero = [r for r in rows if r]
        cols = {c for r in nonzero for c in r}
        ceiling = min(len(nonzero), len(cols))
        q = _random_primes(1, seed)[0]
        try:
            if len(_pivots(nonzero, field, q)[0]) == ceiling:
                return ceiling
        except ZeroDivisionError:
            pass
        return len(_pivots(nonzero, field)[0])
    if method != "multimodular":
        raise ValueError(f"unknown rank method {method!r}")
    return max(len(_pivots(rows, field, q)[0]) for q in _random_primes(n_primes, seed))


def rank(M: ExactMatrix, *, method: str = "exact", n_primes: int = 3, seed: int = 0) -> int:
    """Rank of ``M`` over its field."""
    return rank_of_rows(M.row_dicts(), M.field, method=method, n_primes=n_primes, seed=seed)


def nullspace_of_rows(rows: Sequence[Row], ncols: int, field: FieldSpec = QQ) -> list[dict]:
    """Sparse basis (``col -> value`` dicts) of ``{v : A v = 0}``.

    Each basis vector has a 1 in its own free column and 0 in every other free
    column; free columns are taken in increasing order.
    """
    pivots, mod = _pivots(rows, field)
    pivot_cols = {c for c, _ in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for f in free:
        vec: dict[int, object] = {f: 1}
        for pc, prow in reversed(pivots):
            s = 0
            for c, v in prow.items():
                if c != pc and c in vec:
                    s += v * vec[c]
            if s:
                if mod:
                    val = -s * pow(prow[pc], -1, mod) % mod
                else:
                    val = field.norm(Fraction(-s, prow[pc]) if isinstance(s, int) else -s / prow[pc])
                if val:
                    vec[pc] = val
        basis.append(vec)
    check = _check_kernel(rows, basis, field)
    if not check:
        raise ArithmeticError("nullspace vector failed A v = 0")
    return basis


def _check_kernel(rows: Sequence[Row], vectors: Sequence[dict], field: FieldSpec) -> bool:
    for v in vectors:
        for r in rows:
            s = 0
            if len(r) <= len(v):
                for c, a in r.items():
                    b = v.get(c)
                    if b is not None:
                        s += a * b
            else:
                for c, b in v.items():
                    a = r.get(c)
                    if a is not None:
                        s += a * b
            if field.norm(s) != 0:
                return False
    return True


def nullspace(M: ExactMatrix) -> list[list]:
    """Basis of the right kernel of ``M`` as dense exact vectors."""
    basis = nullspace_of_rows(M.row_dicts(), M.cols, M.field)
    out = []
    for vec in basis:
        dense = [0] * M.cols
        for c, v in vec.items():
            dense[c] = v
        out.append(dense)
    return out


def span_dim_within(vectors: Sequence, ambient_cols: int | None = None,
                    field: FieldSpec = QQ) -> int:
    """Dimension of the span of the vectors (dense sequences or sparse dicts)."""
    rows = []
    for v in vectors:
        if isinstance(v, Mapping):
            row = dict(v)
        else:
            if ambient_cols is not None and len(v) != ambient_cols:
                raise ValueError("vector length does not match ambient dimension")
            row = {j: x for j, x in enumerate(v) if x}
        rows.append(row)
    if ambient_cols is not None:
        for row in rows:
            if any(not 0 <= c < ambient_cols for c in row):
                raise ValueError("vector index outside ambient dimension")
    return rank_of_rows(rows, field)


def echelon_basis(vectors: Sequence[Mapping[int, object]], field: FieldSpec = QQ,
                  order: Sequence[int] | None = None) -> list[dict]:
    """Reduced row echelon basis of the span, pivots leftmost under ``order``.

    ``order`` lists the coordinates from most to least significant; by default
    coordinates are compared by index.  Pivot entries are 1.  The result is a
    canonical function of the span.
    """
    pos = None if order is None else {c: i for i, c in enumerate(order)}

    def key(c):
        return c if pos is None else pos[c]

    basis: list[tuple[int, dict]] = []  # (pivot col, row), pivots strictly increasing in key
    for vec in vectors:
        row = {c: field.convert(v) for c, v in vec.items()}
        row = {c: v for c, v in row.items() if v != 0}
        for pc, brow in basis:
            a = row.get(pc)
            if a:
                for c, v in brow.items():
                    nv = field.norm(row.get(c, 0) - a * v)
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
        if not row:
            continue
        pc = min(row, key=key)
        inv = field.inv(row[pc])
        row = {c: field.norm(v * inv) for c, v in row.items()}
        for i, (qc, qrow) in enumerate(basis):
            a = qrow.get(pc)
            if a:
                for c, v in row.items():
                    nv = field.norm(qrow.get(c, 0) - a * v)
                    if nv:
                        qrow[c] = nv
                    else:
                        qrow.pop(c, None)
        basis.append((pc, row))
        basis.sort(key=lambda t: key(t[0]))
    return [row for _, row in basis]
