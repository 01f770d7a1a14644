"""Cohomology of ``Sym^m Omega(e)`` and ``Sym^m T(e)`` on projective space.

Only two exact sequences are used, both hard-coded::

    0 -> Sym^m Omega(e) -> Sym^m V* (x) O(e-m) -> Sym^(m-1) V* (x) O(e-m+1) -> 0
    0 -> Sym^(m-1) V (x) O(m-1+e) -> Sym^m V (x) O(m+e) -> Sym^m T(e) -> 0

The first map contracts with ``(x_0, ..., x_n)`` (``e^alpha -> sum_i alpha_i x_i
e^(alpha - e_i)``), the second multiplies by the Euler section ``sum_i x_i e_i``.
Line bundle sums only have ``H^0`` and ``H^n``; ``H^0(O(k))`` has the monomial
basis and ``H^n(O(k))`` the Serre-dual basis ``x^-a`` (all ``a_i >= 1``,
``|a| = -k``), on which ``x_i`` acts by ``x^-a -> x^-(a - e_i)`` (zero when
``a_i = 1``).

Every rank is an exact matrix rank.  The maps are equivariant for the torus,
so each splits into blocks indexed by a weight ``w``.  The matrix of a block
depends only on a capped copy of ``w`` (its *signature*), and permuting
coordinates permutes the block, so one rank per sorted signature is computed
and weighted by the number of weights sharing it.  The weight counts are
checked against the closed-form dimensions of the line-bundle sums, and
``blocks=False`` builds the full matrices instead (small cases only).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial, prod

from . import exactlinalg as ela
from .errors import InvariantViolation
from .exactlinalg import QQ, FieldSpec
from .polyring import homog_basis

SYM_OMEGA = "SymOmega"
SYM_TANGENT = "SymTangent"
LINE = "LineBundle"


@dataclass(frozen=True)
class CohomTable:
    """``h^i`` for ``i = 0..n`` of one bundle on ``P^n``."""

    n: int
    bundle: str
    m: int
    e: int
    h: tuple[int, ...]

    def __post_init__(self):
        if len(self.h) != self.n + 1 or any(x < 0 for x in self.h):
            raise InvariantViolation(f"bad cohomology vector {self.h} for P^{self.n}")

    @property
    def euler_char(self) -> int:
        return sum((-1) ** i * x for i, x in enumerate(self.h))

    def __getitem__(self, i: int) -> int:
        return self.h[i]


def _h0_line(n: int, k: int) -> int:
    return comb(n + k, n) if k >= 0 else 0


def _hn_line(n: int, k: int) -> int:
    return comb(-k - 1, n) if k <= -n - 1 else 0


def chi_line(n: int, k: int) -> int:
    """``chi(O(k))`` on ``P^n`` from the Hilbert polynomial ``(k+1)...(k+n)/n!``."""
    return prod(k + i for i in range(1, n + 1)) // factorial(n)


def line_cohomology(n: int, k: int) -> CohomTable:
    """Cohomology of ``O(k)`` on ``P^n``."""
    if n < 1:
        raise ValueError("need n >= 1")
    h = [0] * (n + 1)
    h[0] = _h0_line(n, k)
    h[n] += _hn_line(n, k)
    return CohomTable(n, LINE, 0, k, tuple(h))


def line_sum_cohomology(n: int, k: int, rank: int) -> CohomTable:
    """Cohomology of ``O(k)^rank``."""
    t = line_cohomology(n, k)
    return CohomTable(n, LINE, 0, k, tuple(rank * x for x in t.h))


# ---------------------------------------------------------------------------
# weight blocks
#
# Each map kind below fixes: the range of signature values, which value is the
# "ray" (a half-line of weights collapsing to it), how pinned signature values
# map back to weights, and the block's source/target/matrix.


def _arrangements(sig: tuple[int, ...]) -> int:
    out = factorial(len(sig))
    for c in Counter(sig).values():
        out //= factorial(c)
    return out


def _ray_count(r: int, total: int, start: int) -> int:
    """Integer vectors of length r, entries >= start, summing to total."""
    if r == 0:
        return 1 if total == 0 else 0
    t = total - r * start
    return comb(t + r - 1, r - 1) if t >= 0 else 0


def _capped(n1: int, degree: int, lower=None, upper=None) -> list[tuple[int, ...]]:
    """Exponent vectors of the given degree with ``lower <= alpha <= upper``."""
    lo = tuple(lower) if lower is not None else (0,) * n1
    hi = tuple(min(u, degree) for u in upper) if upper is not None else (degree,) * n1
    room = [0] * (n1 + 1)  # room[i]: most that coordinates i.. can absorb
    for i in range(n1 - 1, -1, -1):
        room[i] = room[i + 1] + hi[i]
    floor = [0] * (n1 + 1)
    for i in range(n1 - 1, -1, -1):
        floor[i] = floor[i + 1] + lo[i]
    out: list[tuple[int, ...]] = []

    def walk(i: int, left: int, prefix: tuple[int, ...]) -> None:
        if i == n1:
            if left == 0:
                out.append(prefix)
            return
        for a in range(max(lo[i], left - room[i + 1]), min(hi[i], left - floor[i + 1]) + 1):
            walk(i + 1, left - a, prefix + (a,))

    if degree >= 0:
        walk(0, degree, ())
    return out


def _sub(mono, i):
    return mono[:i] + (mono[i] - 1,) + mono[i + 1:]


def _add(mono, i):
    return mono[:i] + (mono[i] + 1,) + mono[i + 1:]


@lru_cache(maxsize=None)
def _block(kind: str, m: int, k0: int, sig: tuple[int, ...]) -> tuple[int, int, int]:
    """(source size, target size, rank) of one weight block."""
    n1 = len(sig)
    rows = []
    if kind == "omega_h0":  # alpha <= sig, |alpha| = m  ->  |alpha'| = m-1
        src = _capped(n1, m, upper=sig)
        n_tgt = len(_capped(n1, m - 1, upper=sig))
        for a in src:
            rows.append({_sub(a, i): a[i] for i in range(n1) if a[i]})
    elif kind == "omega_hn":  # alpha >= sig
        src = _capped(n1, m, lower=sig)
        n_tgt = len(_capped(n1, m - 1, lower=sig))
        for a in src:
            rows.append({_sub(a, i): a[i] for i in range(n1) if a[i] - 1 >= sig[i]})
    elif kind == "tangent_h0":  # gamma >= sig, |gamma| = k0  ->  |gamma'| = k0+1
        src = _capped(n1, k0, lower=sig)
        n_tgt = len(_capped(n1, k0 + 1, lower=sig))
        for g in src:
            rows.append({_add(g, i): 1 for i in range(n1)})
    elif kind == "tangent_hn":  # beta <= sig, |beta| = m-1  ->  |beta'| = m
        src = _capped(n1, m - 1, upper=sig)
        n_tgt = len(_capped(n1, m, upper=sig))
        for b in src:
            rows.append({_add(b, i): 1 for i in range(n1) if b[i] + 1 <= sig[i]})
    else:
        raise ValueError(kind)
    rows = [{c: v for c, v in r.items() if v} for r in rows]
    return len(src), n_tgt, ela.rank_of_rows(rows, QQ, method="bounded")


def _block_sums(kind: str, n: int, m: int, e: int) -> tuple[int, int, int]:
    """Total (source dim, target dim, rank) of one section-level map."""
    n1 = n + 1
    k0 = 0
    if kind == "omega_h0":
        # w >= 0, sig = min(w, m); ray value m <-> w >= m; pinned w = sig
        if e - m < 0:
            return 0, _h0_line(n, e - m + 1) * comb(m - 1 + n, n), 0
        values, ray_value, ray_start, total = range(m + 1), m, m, e

        def pinned(s):
            return s
    elif kind == "omega_hn":
        # w <= m-1, sig = max(0, w+1); ray value 0 <-> w <= -1; pinned w = sig-1
        # (bookkeeping in -w, whose coordinates sum to -e)
        values, ray_value, ray_start, total = range(m + 1), 0, 1, -e

        def pinned(s):
            return -(s - 1)
    elif kind == "tangent_h0":
        k0 = m - 1 + e
        if k0 < 0:
            return 0, _h0_line(n, m + e) * comb(m + n, n), 0
        # w = beta - gamma sums to -e; sig = max(0, -w); ray value 0 <-> w >= 0
        values, ray_value, ray_start, total = range(k0 + 2), 0, 0, -e

        def pinned(s):
            return -s
    elif kind == "tangent_hn":
        # w >= 1, sig = min(w-1, m); ray value m <-> w >= m+1; pinned w = sig+1
        values, ray_value, ray_start, total = range(m + 1), m, m + 1, -e

        def pinned(s):
            return s + 1
    else:
        raise ValueError(kind)
    src_total = tgt_total = rank_total = 0
    for sig in combinations_with_replacement(values, n1):
        r = sig.count(ray_value)
        pinned_sum = sum(pinned(s) for s in sig if s != ray_value)
        mult = _ray_count(r, total - pinned_sum, ray_start)
        if not mult:
            continue
        s_src, s_tgt, s_rank = _block(kind, m, k0, sig)
        if not (s_src or s_tgt):
            continue
        mult *= _arrangements(sig)
        src_total += mult * s_src
        tgt_total += mult * s_tgt
        rank_total += mult * s_rank
    return src_total, tgt_total, rank_total


def _full_map(kind: str, n: int, m: int, e: int) -> tuple[int, int, int]:
    """Same totals as :func:`_block_sums`, from the unsplit matrix."""
    n1 = n + 1
    rows = []
    if kind == "omega_h0":
        k = e - m
        src = [(a, g) for a in homog_basis(n1, m) for g in (homog_basis(n1, k) if k >= 0 else [])]
        n_tgt = comb(m - 1 + n, n) * _h0_line(n, k + 1)
        for a, g in src:
            rows.append({(_sub(a, i), _add(g, i)): a[i] for i in range(n1) if a[i]})
    elif kind == "omega_hn":
        k = e - m
        neg = [x for x in homog_basis(n1, -k) if min(x) >= 1] if -k >= n1 else []
        src = [(a, x) for a in homog_basis(n1, m) for x in neg]
        n_tgt = comb(m - 1 + n, n) * _hn_line(n, k + 1)
        for a, x in src:
            rows.append({(_sub(a, i), _sub(x, i)): a[i] for i in range(n1) if a[i] and x[i] >= 2})
    elif kind == "tangent_h0":
        k = m - 1 + e
        src = [(b, g) for b in homog_basis(n1, m - 1) for g in (homog_basis(n1, k) if k >= 0 else [])]
        n_tgt = comb(m + n, n) * _h0_line(n, k + 1)
        for b, g in src:
            rows.append({(_add(b, i), _add(g, i)): 1 for i in range(n1)})
    elif kind == "tangent_hn":
        k = m - 1 + e
        neg = [x for x in homog_basis(n1, -k) if min(x) >= 1] if -k >= n1 else []
        src = [(b, x) for b in homog_basis(n1, m - 1) for x in neg]
        n_tgt = comb(m + n, n) * _hn_line(n, k + 1)
        for b, x in src:
            rows.append({(_add(b, i), _sub(x, i)): 1 for i in range(n1) if x[i] >= 2})
    else:
        raise ValueError(kind)
    return len(src), n_tgt, ela.rank_of_rows([r for r in rows if r], QQ)


def _map_totals(kind: str, n: int, m: int, e: int, blocks: bool) -> tuple[int, int, int]:
    return _block_sums(kind, n, m, e) if blocks else _full_map(kind, n, m, e)


# ---------------------------------------------------------------------------
# the two bundles


@lru_cache(maxsize=None)
def sym_omega_cohomology(n: int, m: int, e: int, blocks: bool = True) -> CohomTable:
    """``h^i(P^n, Sym^m Omega(e))`` for all i, over Q."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    rk_a, rk_b = comb(m + n, n), comb(m - 1 + n, n)
    s0, t0, r0 = _map_totals("omega_h0", n, m, e, blocks)
    sn, tn, rn = _map_totals("omega_hn", n, m, e, blocks)
    expected = (rk_a * _h0_line(n, e - m), rk_b * _h0_line(n, e - m + 1),
                rk_a * _hn_line(n, e - m), rk_b * _hn_line(n, e - m + 1))
    if (s0, t0, sn, tn) != expected:
        raise InvariantViolation(f"weight-block dimensions {(s0, t0, sn, tn)} != {expected}")
    if rn != tn:
        raise InvariantViolation("top-cohomology map is not surjective")
    h = [0] * (n + 1)
    h[0] = s0 - r0
    h[1] = t0 - r0
    h[n] += sn - rn
    return CohomTable(n, SYM_OMEGA, m, e, tuple(h))


@lru_cache(maxsize=None)
def _sym_tangent(n: int, m: int, e: int, blocks: bool) -> CohomTable:
    rk_a, rk_b = comb(m - 1 + n, n), comb(m + n, n)
    s0, t0, r0 = _map_totals("tangent_h0", n, m, e, blocks)
    sn, tn, rn = _map_totals("tangent_hn", n, m, e, blocks)
    expected = (rk_a * _h0_line(n, m - 1 + e), rk_b * _h0_line(n, m + e),
                rk_a * _hn_line(n, m - 1 + e), rk_b * _hn_line(n, m + e))
    if (s0, t0, sn, tn) != expected:
        raise InvariantViolation(f"weight-block dimensions {(s0, t0, sn, tn)} != {expected}")
    if r0 != s0:
        raise InvariantViolation("Euler-section map on H^0 is not injective")
    h = [0] * (n + 1)
    h[0] = t0 - r0
    h[n - 1] += sn - rn
    h[n] += tn - rn
    return CohomTable(n, SYM_TANGENT, m, e, tuple(h))


def sym_tangent_cohomology(n: int, m: int, e: int, field: FieldSpec = QQ,
                           blocks: bool = True) -> CohomTable:
    """``h^i(P^n, Sym^m T(e))`` for all i.

    Prime fields are refused: the identification of ``Sym^m`` of a dual with
    the dual of ``Sym^m`` behind the Omega/T comparison needs characteristic 0.
    """
    if not field.is_rational:
        raise ValueError("symmetric powers of the tangent bundle are only supported over Q")
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    return _sym_tangent(n, m, e, blocks)


def omega_euler_characteristic(n: int, m: int, e: int) -> int:
    """``chi(Sym^m Omega(e))`` from the Euler sequence ranks alone."""
    return comb(m + n, n) * chi_line(n, e - m) - comb(m - 1 + n, n) * chi_line(n, e - m + 1)


def tangent_euler_characteristic(n: int, m: int, e: int) -> int:
    return comb(m + n, n) * chi_line(n, m + e) - comb(m - 1 + n, n) * chi_line(n, m - 1 + e)


def serre_dual_pair_agrees(n: int, m: int, e: int) -> bool:
    """``h^i(Sym^m Omega(e)) == h^(n-i)(Sym^m T(-e-n-1))`` for every i."""
    a = sym_omega_cohomology(n, m, e)
    b = sym_tangent_cohomology(n, m, -e - n - 1)
    return all(a.h[i] == b.h[n - i] for i in range(n + 1))


# ---------------------------------------------------------------------------
# long exact sequences


@dataclass(frozen=True)
class LesVerdict:
    consistent: bool
    ranks: tuple[int, ...]
    violations: tuple[str, ...]


def les_template(dims_a, dims_b, dims_c, ranks: dict | None = None) -> LesVerdict:
    """Check that h-vectors of ``0 -> A -> B -> C -> 0`` fit an exact sequence.

    The long sequence is ``A^0 B^0 C^0 A^1 B^1 C^1 ...``; map ``k`` goes from
    term ``k`` to term ``k + 1``.  Exactness forces ``rank_k = dim_k -
    rank_(k-1)``, starting from 0, so the dimensions determine every rank.
    Known ranks in ``ranks`` (keyed by ``k``) are compared with those.
    """
    if not (len(dims_a) == len(dims_b) == len(dims_c)):
        raise ValueError("h-vectors must have equal length")
    terms = [x for triple in zip(dims_a, dims_b, dims_c) for x in triple]
    ranks = ranks or {}
    violations = []
    derived = []
    prev = 0
    for k, dim in enumerate(terms):
        r = dim - prev
        nxt = terms[k + 1] if k + 1 < len(terms) else 0
        if r < 0:
            violations.append(f"term {k}: dimension {dim} < incoming rank {prev}")
        if r > nxt:
            violations.append(f"map {k}: rank {r} exceeds target dimension {nxt}")
        if k in ranks and ranks[k] != r:
            violations.append(f"map {k}: given rank {ranks[k]} but exactness forces {r}")
        derived.append(r)
        prev = r
    chi = lambda v: sum((-1) ** i * x for i, x in enumerate(v))  # noqa: E731
    if chi(dims_b) != chi(dims_a) + chi(dims_c):
        violations.append("Euler characteristics are not additive")
    return LesVerdict(not violations, tuple(derived), tuple(violations))


def omega_euler_sequence_check(n: int, m: int, e: int) -> LesVerdict:
    """Self-check of ``0 -> Sym^m Omega(e) -> A -> B -> 0`` with computed tables."""
    k = sym_omega_cohomology(n, m, e)
    a = line_sum_cohomology(n, e - m, comb(m + n, n))
    b = line_sum_cohomology(n, e - m + 1, comb(m - 1 + n, n))
    return les_template(k.h, a.h, b.h)
