"""Tangent-bundle positivity evidence from operator dimensions.

On ``X = Proj R`` with ``L = O_X(1)``, operators of order ``<= m`` and degree
``-e`` are the sections of a sheaf filtered with graded pieces ``Sym^j T_X``.
Global sections are left exact, so

    dim D^m_{-e} > dim D^{m-1}_{-e}   implies   H^0(X, Sym^m T_X (x) L^{-e}) != 0.

Nothing follows from the absence of a jump except that none occurs up to the
scanned order.  The report wording keeps that distinction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diffop, hypervanish
from .errors import InvariantViolation
from .polyring import RingSpec

EVIDENCE_ALL = "EvidenceForAllTestedE"
EVIDENCE_PARTIAL = "PartialEvidence"
NO_NEGATIVE = "NoNegativeOperatorsUpToBound"


@dataclass
class BignessReport:
    spec: RingSpec
    e_max: int
    m_max: int
    found: dict  # e -> (m, jump) or None
    dims: dict  # (m, -e) -> dim, every cell computed
    degree_zero: dict  # m -> dim (D^m)_0
    verdict: str
    assumptions: tuple[str, ...] = field(default=())

    def rows(self) -> list[dict]:
        out = []
        for e in range(1, self.e_max + 1):
            hit = self.found[e]
            out.append({"e": e, "found": hit is not None,
                        "m": hit[0] if hit else None, "jump": hit[1] if hit else None,
                        "searched_up_to": self.m_max})
        return out

    def summary(self) -> str:
        lines = []
        for r in self.rows():
            if r["found"]:
                lines.append(f"e={r['e']}: H^0(X, Sym^{r['m']} T_X (x) L^-{r['e']}) != 0 "
                             f"(jump {r['jump']} at order {r['m']})")
            else:
                lines.append(f"e={r['e']}: no jump up to order {self.m_max}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "e_max": self.e_max, "m_max": self.m_max,
                "assumptions": list(self.assumptions), "per_e": self.rows(),
                "degree_zero": {str(m): v for m, v in sorted(self.degree_zero.items())}}


def _assumptions(spec: RingSpec) -> tuple[str, ...]:
    out = ["generated in degree 1 (all variables have weight 1)"]
    if spec.assert_smooth_proj:
        out.append("Proj R smooth: asserted by the ring file, not verified")
    else:
        out.append("Proj R smooth: NOT asserted; jumps still bound operator dimensions "
                   "but the tangent-bundle reading needs smoothness")
    return tuple(out)


def bigness_evidence(spec: RingSpec, e_max: int, m_max: int, *, method: str = "exact",
                     unknowns: str = "weyl", degree_zero: bool = True,
                     workers: int = 1) -> BignessReport:
    """Scan ``m = 1..m_max`` at each degree ``-e``, ``1 <= e <= e_max``.

    Each found order is minimal and is re-verified: both cells are recomputed
    with the other unknown basis before the report is returned.
    """
    if e_max < 1 or m_max < 1:
        raise ValueError("need e_max >= 1 and m_max >= 1")
    dims: dict = {}
    found: dict = {}
    for e in range(1, e_max + 1):
        found[e] = None
        # D^0 = R has nothing in negative degree, so the first jump is the
        # first nonzero cell and its size is that cell's dimension
        for m in range(1, m_max + 1):
            dims[(m, -e)] = diffop.operator_dim(spec, m, -e, method=method, unknowns=unknowns)
            if dims[(m, -e)] > 0:
                found[e] = (m, dims[(m, -e)])
                break
    other = "standard" if unknowns == "weyl" else "weyl"
    for e, hit in found.items():
        if hit is None:
            continue
        m, jump = hit
        hi = diffop.operator_dim(spec, m, -e, unknowns=other)
        lo = diffop.operator_dim(spec, m - 1, -e, unknowns=other) if m > 1 else 0
        if hi - lo != jump or lo != 0:
            raise InvariantViolation(
                f"jump at (m={m}, e={-e}) not reproduced: {lo} -> {hi}")
    zero = {}
    if degree_zero:
        zero = diffop.compute_grid(spec, [(m, 0) for m in range(1, m_max + 1)],
                                   method=method, unknowns=unknowns, workers=workers)
        zero = {m: v for (m, _), v in zero.items()}
        if any(v < 1 for v in zero.values()):
            raise InvariantViolation("degree-0 operators missing (Euler operator)")
    hits = sum(h is not None for h in found.values())
    verdict = EVIDENCE_ALL if hits == e_max else NO_NEGATIVE if hits == 0 else EVIDENCE_PARTIAL
    return BignessReport(spec, e_max, m_max, found, dims, zero, verdict, _assumptions(spec))


def surface_degree(spec: RingSpec) -> int | None:
    """Degree ``d`` when ``spec`` presents a surface ``x`` in ``P^3`` by one relation."""
    if spec.nvars != 4 or len(spec.relations) != 1:
        return None
    return spec.relations[0].degree


@dataclass(frozen=True)
class CoherenceRow:
    e: int
    m: int
    jump: bool
    hypervanish: str


def cross_check(report: BignessReport, d: int | None = None) -> tuple[bool, list[CoherenceRow]]:
    """Compare a report with the vanishing chase on the same surface.

    A jump at ``(m, -e)`` proves ``H^0(Sym^m T_X(-e)) != 0``, so the chase must
    return Unknown there.  Cells scanned without a jump are listed with the
    chase verdict for information; they impose no constraint.
    """
    d = d if d is not None else surface_degree(report.spec)
    if d is None:
        raise ValueError("cross-check needs a single-relation surface in P^3")
    ok = True
    rows = []
    for (m, neg_e) in sorted(report.dims):
        e = -neg_e
        hit = report.found.get(e)
        jump = hit is not None and hit[0] == m
        verdict = hypervanish.sym_tangent_twist_h0(d, m, -e)
        if jump and verdict.certified:
            ok = False
        rows.append(CoherenceRow(e, m, jump, verdict.verdict))
    return ok, rows
