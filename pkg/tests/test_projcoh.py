from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from diffcoh import projcoh
from diffcoh.errors import InvariantViolation
from diffcoh.exactlinalg import FieldSpec
from diffcoh.projcoh import (CohomTable, les_template, line_cohomology, sym_omega_cohomology,
                             sym_tangent_cohomology)


def test_line_examples():
    assert line_cohomology(3, 2).h == (10, 0, 0, 0)
    assert line_cohomology(3, -4).h == (0, 0, 0, 1)
    assert line_cohomology(3, -2).h == (0, 0, 0, 0)
    assert line_cohomology(1, -3).h == (0, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_line_euler_characteristic(n):
    for k in range(-12, 12):
        assert line_cohomology(n, k).euler_char == projcoh.chi_line(n, k)


def test_omega_examples():
    assert sym_omega_cohomology(3, 1, 2).h[0] == 6
    assert sym_omega_cohomology(3, 1, 0).h == (0, 1, 0, 0)
    for m in range(1, 7):
        for e in range(-10, m + 1):
            assert sym_omega_cohomology(3, m, e).h[0] == 0
        for e in range(-10, m - 1):
            assert sym_omega_cohomology(3, m, e).h[1] == 0


def test_omega_canonical_bundle():
    # Omega on P^n, twist 0: only h^1 = 1; top power of Omega is O(-n-1)
    for n in (2, 3, 4):
        assert sym_omega_cohomology(n, 1, 0).h == (0, 1) + (0,) * (n - 1)


def test_tangent_examples():
    assert sym_tangent_cohomology(2, 1, 0).h == (8, 0, 0)
    # Sym^2 T(-1) = Sym^2(T(-1)) (x) O(1) is globally generated, so h^0 > 0
    assert sym_tangent_cohomology(3, 2, -1).h == (36, 0, 0, 0)
    assert sym_tangent_cohomology(3, 2, -3).h[0] == 0


def test_tangent_refuses_prime_fields():
    with pytest.raises(ValueError):
        sym_tangent_cohomology(3, 1, 0, FieldSpec.prime(5))


def test_domain_errors():
    with pytest.raises(ValueError):
        sym_omega_cohomology(1, 1, 0)
    with pytest.raises(ValueError):
        sym_omega_cohomology(3, 0, 0)
    with pytest.raises(InvariantViolation):
        CohomTable(2, "SymOmega", 1, 0, (0, -1, 0))


def test_h0_omega_at_e_equals_m():
    for n in (2, 3, 4, 5):
        for m in range(1, 7):
            assert sym_omega_cohomology(n, m, m).h[0] == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(-9, 8))
def test_weight_blocks_match_full_matrices(n, m, e):
    assert sym_omega_cohomology(n, m, e) == sym_omega_cohomology(n, m, e, blocks=False)
    assert sym_tangent_cohomology(n, m, e) == sym_tangent_cohomology(n, m, e, blocks=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(1, 5), st.integers(-12, 12))
def test_euler_characteristics_and_duality(n, m, e):
    a = sym_omega_cohomology(n, m, e)
    assert a.euler_char == projcoh.omega_euler_characteristic(n, m, e)
    t = sym_tangent_cohomology(n, m, e)
    assert t.euler_char == projcoh.tangent_euler_characteristic(n, m, e)
    assert projcoh.serre_dual_pair_agrees(n, m, e)
    assert all(a.h[i] == 0 for i in range(2, n))


def test_large_twist_only_sections():
    # far above the vanishing range every higher group is zero, so h^0 = chi
    for n, m in [(3, 2), (4, 3)]:
        t = sym_omega_cohomology(n, m, 3 * m)
        assert t.h[1:] == (0,) * n
        assert t.h[0] == projcoh.omega_euler_characteristic(n, m, 3 * m)


def test_les_examples():
    v = les_template((1, 0, 2), (1, 0, 2), (0, 0, 0))
    assert v.consistent and v.ranks == (1, 0, 0, 0, 0, 0, 2, 0, 0)
    bad = les_template((1, 0, 0), (0, 0, 0), (0, 0, 0))
    assert not bad.consistent and any("Euler" in x for x in bad.violations)
    assert projcoh.omega_euler_sequence_check(3, 2, 0).consistent


def test_les_given_ranks():
    v = les_template((0, 1), (0, 0), (1, 0), ranks={2: 1})
    assert v.consistent
    v = les_template((0, 1), (0, 0), (1, 0), ranks={2: 0})
    assert not v.consistent


def test_memo_returns_same_object():
    assert sym_omega_cohomology(4, 3, 2) is sym_omega_cohomology(4, 3, 2)
