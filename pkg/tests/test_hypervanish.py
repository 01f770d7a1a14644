from __future__ import annotations

import copy
import json

import pytest
from hypothesis import given, settings, strategies as st

from diffcoh import hypervanish as hv
from diffcoh.hypervanish import (ReplayError, intrinsic_h0_vanishing, replay_certificate,
                                 restricted_vanishing, sym_tangent_h0)


@pytest.mark.parametrize("m", range(1, 21))
def test_cubic_restricted(m):
    c0 = restricted_vanishing(3, 3, m, m, 0)
    c1 = restricted_vanishing(3, 3, m, m - 3, 1)
    assert c0.certified and c1.certified
    assert replay_certificate(c0) == 2 and replay_certificate(c1) == 2


def test_blocked_chase_reports_the_leaf():
    v = restricted_vanishing(3, 3, 1, 5, 0)
    assert v.verdict == hv.UNKNOWN
    (node, value), = v.blocking
    assert node.kind == hv.AMBIENT and (node.m, node.e, node.i) == (1, 5, 0) and value > 0


@pytest.mark.parametrize("m", [1, 2, 5, 12])
def test_cubic_surface_intrinsic(m):
    c = intrinsic_h0_vanishing(3, 3, m, m)
    assert c.certified and c.rule == hv.RULE_CONORMAL
    assert replay_certificate(c) >= 4


def test_quadric_is_unknown():
    for m in range(1, 9):  # m <= 20 runs in the acceptance suite
        assert sym_tangent_h0(2, m).verdict == hv.UNKNOWN
    for m in range(2, 12):
        assert intrinsic_h0_vanishing(3, 2, m, m).verdict == hv.UNKNOWN


def test_quadric_m1_certificate_is_sound():
    # On P^1 x P^1, Omega_X(1) = O(-1, 1) + O(1, -1) has no sections, so the
    # chase may (and does) close at m = 1.
    c = intrinsic_h0_vanishing(3, 2, 1, 1)
    assert c.certified and replay_certificate(c) == 4


def test_quartic_untwisted():
    # recorded rather than demanded: the chase closes for small m
    got = [intrinsic_h0_vanishing(3, 4, m, 0).certified for m in range(1, 6)]
    assert got == [True] * 5
    assert sym_tangent_h0(4, 1).certified


def test_m1_uses_line_bundle_node():
    c = sym_tangent_h0(3, 1)
    left = c.children[1]
    assert left.root.kind == hv.LINE and left.root.on_x


def test_json_roundtrip_and_replay():
    c = sym_tangent_h0(3, 4)
    doc = json.loads(c.to_json())
    assert hv.VanishCertificate.from_dict(doc) == c
    assert replay_certificate(doc) == replay_certificate(c)


def _leaves(doc):
    if doc["rule"] == hv.RULE_LEAF:
        yield doc
    for ch in doc.get("children", ()):
        yield from _leaves(ch)


def test_tampered_certificates_fail():
    doc = sym_tangent_h0(3, 3).to_dict()
    bad = copy.deepcopy(doc)
    next(_leaves(bad))["node"]["e"] += 40  # a nonzero table entry
    with pytest.raises(ReplayError):
        replay_certificate(bad)
    bad = copy.deepcopy(doc)
    bad["children"][1]["node"]["e"] += 1  # child does not follow the rule
    with pytest.raises(ReplayError):
        replay_certificate(bad)
    bad = copy.deepcopy(doc)
    bad["rule"] = hv.RULE_RESTRICTION
    with pytest.raises(ReplayError):
        replay_certificate(bad)


def test_domain_errors():
    with pytest.raises(ValueError):
        restricted_vanishing(2, 3, 1, 0, 0)
    with pytest.raises(ValueError):
        restricted_vanishing(3, 3, 1, 0, 2)
    with pytest.raises(ValueError):
        intrinsic_h0_vanishing(3, 0, 1, 0)
    with pytest.raises(ValueError):
        sym_tangent_h0(6, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 4), st.integers(1, 5), st.integers(1, 6), st.integers(-8, 8), st.integers(1, 6))
def test_monotone_in_twist(n, d, m, e, drop):
    if intrinsic_h0_vanishing(n, d, m, e).certified:
        assert intrinsic_h0_vanishing(n, d, m, e - drop).certified
    if restricted_vanishing(n, d, m, e, 0).certified:
        assert restricted_vanishing(n, d, m, e - drop, 0).certified


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 4), st.integers(1, 5), st.integers(1, 6), st.integers(-8, 8))
def test_every_certificate_replays(n, d, m, e):
    v = intrinsic_h0_vanishing(n, d, m, e)
    if v.certified:
        assert replay_certificate(v.to_dict()) == sum(1 for _ in v.leaves())
