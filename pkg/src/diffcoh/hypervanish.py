"""Vanishing certificates for symmetric differentials on hypersurfaces.

For a smooth hypersurface ``X`` of degree ``d`` in ``P^n`` two short exact
sequences are chased:

``restriction``
    ``0 -> F(e - d) -> F(e) -> F|_X(e) -> 0`` for ``F = Sym^m Omega_P`` or
    ``F = O_P``.  ``H^i`` of the right term vanishes once ``H^i`` of the middle
    and ``H^(i+1)`` of the left term do.

``conormal``
    the symmetric powers of ``0 -> O_X(-d) -> Omega_P|_X -> Omega_X -> 0``,
    namely ``0 -> Sym^(m-1) Omega_P|_X(e - d) -> Sym^m Omega_P|_X(e) ->
    Sym^m Omega_X(e) -> 0``.  ``H^0`` of the right term vanishes once ``H^0`` of
    the middle and ``H^1`` of the left term do.  For ``m = 1`` the left term is
    the line bundle ``O_X(e - d)``.

Leaves are exact tables from :mod:`diffcoh.projcoh`.  The engine only ever
proves vanishing: whenever a leaf is nonzero the answer is :class:`Unknown`,
which says nothing about the actual dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from . import projcoh

AMBIENT = "AmbientSym"
RESTRICTED = "RestrictedSym"
INTRINSIC = "IntrinsicSym"
LINE = "Line"

RULE_LEAF = "projcoh-table"
RULE_RESTRICTION = "restriction"
RULE_CONORMAL = "conormal"

CERTIFIED = "Certified-Zero"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SheafNode:
    """``H^i`` of one sheaf.  ``Line`` nodes live on ``X`` when ``on_x`` is set."""

    kind: str
    n: int
    d: int
    m: int
    e: int
    i: int
    on_x: bool = False

    def __post_init__(self):
        if self.kind not in (AMBIENT, RESTRICTED, INTRINSIC, LINE):
            raise ValueError(f"unknown sheaf kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("hypersurface degree must be >= 1")
        if self.kind == LINE and self.m != 0:
            raise ValueError("line bundle nodes carry m = 0")

    def label(self) -> str:
        if self.kind == AMBIENT:
            s = f"Sym^{self.m} Omega_P{self.n}({self.e})"
        elif self.kind == RESTRICTED:
            s = f"Sym^{self.m} Omega_P{self.n}|_X({self.e})"
        elif self.kind == INTRINSIC:
            s = f"Sym^{self.m} Omega_X({self.e})"
        else:
            s = f"O_{'X' if self.on_x else 'P' + str(self.n)}({self.e})"
        return f"H^{self.i}({s})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "d": self.d, "m": self.m,
                "e": self.e, "i": self.i, "on_x": self.on_x}

    @classmethod
    def from_dict(cls, data: dict) -> "SheafNode":
        return cls(data["kind"], data["n"], data["d"], data["m"], data["e"],
                   data["i"], bool(data.get("on_x", False)))


@dataclass(frozen=True)
class VanishCertificate:
    """A replayable proof that ``h^i`` of ``root`` is zero."""

    root: SheafNode
    rule: str
    children: tuple["VanishCertificate", ...] = ()
    leaf_value: int | None = None

    verdict = CERTIFIED

    @property
    def certified(self) -> bool:
        return True

    def leaves(self):
        if self.rule == RULE_LEAF:
            yield self
        for c in self.children:
            yield from c.leaves()

    def to_dict(self) -> dict:
        out = {"node": self.root.to_dict(), "label": self.root.label(), "rule": self.rule}
        if self.rule == RULE_LEAF:
            out["value"] = self.leaf_value
        else:
            out["children"] = [c.to_dict() for c in self.children]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "VanishCertificate":
        return cls(SheafNode.from_dict(data["node"]), data["rule"],
                   tuple(cls.from_dict(c) for c in data.get("children", ())),
                   data.get("value"))


@dataclass(frozen=True)
class Unknown:
    """The chase did not close; ``blocking`` holds the first nonzero leaf met."""

    root: SheafNode
    blocking: tuple[tuple[SheafNode, int], ...] = field(default=())

    verdict = UNKNOWN

    @property
    def certified(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"node": self.root.to_dict(), "label": self.root.label(), "verdict": UNKNOWN,
                "blocking": [{"label": n.label(), "node": n.to_dict(), "value": v}
                             for n, v in self.blocking]}


Verdict = Union[VanishCertificate, Unknown]


def _table_value(node: SheafNode) -> int:
    if node.kind == AMBIENT:
        return projcoh.sym_omega_cohomology(node.n, node.m, node.e).h[node.i]
    if node.kind == LINE and not node.on_x:
        return projcoh.line_cohomology(node.n, node.e).h[node.i]
    raise ValueError(f"{node.label()} is not a table leaf")


def _leaf(node: SheafNode) -> Verdict:
    if not 0 <= node.i <= node.n:
        return VanishCertificate(node, RULE_LEAF, (), 0)
    v = _table_value(node)
    return VanishCertificate(node, RULE_LEAF, (), 0) if v == 0 else Unknown(node, ((node, v),))


def _combine(node: SheafNode, rule: str, parts) -> Verdict:
    """Evaluate the outer terms in order and stop at the first one that fails.

    ``parts`` holds zero-argument callables, so a blocked chase does not pay
    for the remaining branches.
    """
    done = []
    for make in parts:
        p = make()
        if not p.certified:
            return Unknown(node, p.blocking)
        done.append(p)
    return VanishCertificate(node, rule, tuple(done))


def _check(n: int, d: int, m: int):
    if n < 3:
        raise ValueError("ambient dimension must be >= 3")
    if d < 1:
        raise ValueError("degree must be >= 1")
    if m < 1:
        raise ValueError("symmetric power must be >= 1")


def _line_on_x(n: int, d: int, e: int, i: int) -> Verdict:
    node = SheafNode(LINE, n, d, 0, e, i, on_x=True)
    parts = [lambda: _leaf(SheafNode(LINE, n, d, 0, e, i)),
             lambda: _leaf(SheafNode(LINE, n, d, 0, e - d, i + 1))]
    return _combine(node, RULE_RESTRICTION, parts)


def restricted_vanishing(n: int, d: int, m: int, e: int, i: int) -> Verdict:
    """Try to prove ``H^i(X, Sym^m Omega_P|_X(e)) = 0`` for ``i`` in {0, 1}."""
    _check(n, d, m)
    if i not in (0, 1):
        raise ValueError("only H^0 and H^1 are chased")
    node = SheafNode(RESTRICTED, n, d, m, e, i)
    parts = [lambda: _leaf(SheafNode(AMBIENT, n, d, m, e, i)),
             lambda: _leaf(SheafNode(AMBIENT, n, d, m, e - d, i + 1))]
    return _combine(node, RULE_RESTRICTION, parts)


def intrinsic_h0_vanishing(n: int, d: int, m: int, e: int) -> Verdict:
    """Try to prove ``H^0(X, Sym^m Omega_X(e)) = 0``."""
    _check(n, d, m)
    node = SheafNode(INTRINSIC, n, d, m, e, 0)

    def middle():
        return restricted_vanishing(n, d, m, e, 0)

    def left():
        if m == 1:
            return _line_on_x(n, d, e - d, 1)
        return restricted_vanishing(n, d, m - 1, e - d, 1)

    return _combine(node, RULE_CONORMAL, [middle, left])


def sym_tangent_twist_h0(d: int, m: int, t: int = 0) -> Verdict:
    """``H^0(X, Sym^m T_X(t))`` for a surface ``X`` of degree d in ``P^3``.

    ``T_X = Omega_X(4 - d)`` on such a surface, so this is the intrinsic
    chase at twist ``m (4 - d) + t``.
    """
    if not 1 <= d <= 5:
        raise ValueError("surface degree must lie in 1..5")
    if m < 1:
        raise ValueError("symmetric power must be >= 1")
    return intrinsic_h0_vanishing(3, d, m, m * (4 - d) + t)


def sym_tangent_h0(d: int, m: int) -> Verdict:
    return sym_tangent_twist_h0(d, m, 0)


# ---------------------------------------------------------------------------
# replay: written against the rule table, not the builders above


class ReplayError(AssertionError):
    pass


def _expected_children(node: SheafNode, rule: str) -> list[SheafNode]:
    n, d, m, e, i = node.n, node.d, node.m, node.e, node.i
    if rule == RULE_RESTRICTION:
        if node.kind == RESTRICTED:
            return [SheafNode(AMBIENT, n, d, m, e, i), SheafNode(AMBIENT, n, d, m, e - d, i + 1)]
        if node.kind == LINE and node.on_x:
            return [SheafNode(LINE, n, d, 0, e, i), SheafNode(LINE, n, d, 0, e - d, i + 1)]
    if rule == RULE_CONORMAL and node.kind == INTRINSIC and i == 0:
        sub = (SheafNode(LINE, n, d, 0, e - d, 1, on_x=True) if m == 1
               else SheafNode(RESTRICTED, n, d, m - 1, e - d, 1))
        return [SheafNode(RESTRICTED, n, d, m, e, 0), sub]
    raise ReplayError(f"rule {rule!r} does not apply to {node.label()}")


def replay_certificate(cert: VanishCertificate | dict) -> int:
    """Re-check every step of a certificate; return the number of leaves.

    Accepts a certificate or its serialized form.  Raises :class:`ReplayError`
    on the first step that does not hold.
    """
    if isinstance(cert, dict):
        cert = VanishCertificate.from_dict(cert)
    node = cert.root
    if cert.rule == RULE_LEAF:
        if cert.children:
            raise ReplayError("leaf with children")
        if node.kind == AMBIENT:
            h = projcoh.sym_omega_cohomology(node.n, node.m, node.e).h
        elif node.kind == LINE and not node.on_x:
            h = projcoh.line_cohomology(node.n, node.e).h
        else:
            raise ReplayError(f"{node.label()} cannot be a leaf")
        actual = h[node.i] if 0 <= node.i < len(h) else 0
        if actual != 0 or cert.leaf_value != 0:
            raise ReplayError(f"leaf {node.label()} has dimension {actual}")
        return 1
    want = _expected_children(node, cert.rule)
    got = [c.root for c in cert.children]
    if got != want:
        raise ReplayError(f"{node.label()}: children {got} do not match rule {cert.rule}")
    return sum(replay_certificate(c) for c in cert.children)
