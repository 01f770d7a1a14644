from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diffcoh import exactlinalg as ela
from diffcoh.exactlinalg import QQ, ExactMatrix, FieldSpec

F2 = FieldSpec.prime(2)


def test_rank_examples():
    assert ela.rank(ExactMatrix.identity(3)) == 3
    assert ela.rank(ExactMatrix.zeros(4, 7)) == 0
    assert ela.rank(ExactMatrix.from_dense([[1, 2, 3], [2, 4, 6], [0, 1, 1]])) == 2
    assert ela.rank(ExactMatrix.from_dense([[1, 2], [3, 4]], F2)) == 1


def test_nullspace_examples():
    assert ela.nullspace(ExactMatrix.identity(2)) == []
    ker = ela.nullspace(ExactMatrix.from_dense([[1, 1, 1]]))
    assert len(ker) == 2 and all(sum(v) == 0 for v in ker)
    assert len(ela.nullspace(ExactMatrix.zeros(3, 5))) == 5


def test_span_examples():
    assert ela.span_dim_within([(1, 0), (0, 1), (1, 1)]) == 2
    assert ela.span_dim_within([]) == 0
    assert ela.span_dim_within([(2, 4), (1, 2)]) == 1


def test_prime_field_requires_prime():
    with pytest.raises(ValueError):
        FieldSpec.prime(6)


def test_fractions_are_exact():
    m = ExactMatrix.from_dense([[Fraction(1, 3), Fraction(2, 3)], [1, 2]])
    assert ela.rank(m) == 1


def test_stored_zeros_are_dropped():
    m = ExactMatrix(2, 2, {(0, 0): 0, (1, 1): 5})
    assert m.nnz == 1


def test_out_of_range_entry_rejected():
    with pytest.raises(IndexError):
        ExactMatrix(2, 2, {(2, 0): 1})


small = st.integers(-4, 4)
matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_transpose(rows):
    m = ExactMatrix.from_dense(rows)
    assert ela.rank(m) == ela.rank(m.transpose())


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([QQ, FieldSpec.prime(2), FieldSpec.prime(7)]))
def test_rank_nullity(rows, field):
    m = ExactMatrix.from_dense(rows, field)
    ker = ela.nullspace(m)
    assert ela.rank(m) + len(ker) == m.cols
    for v in ker:
        assert all(x == 0 for x in m.apply(v))


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([2, 3, 5, 7, 101]))
def test_semicontinuity(rows, p):
    assert ela.rank(ExactMatrix.from_dense(rows, FieldSpec.prime(p))) <= ela.rank(ExactMatrix.from_dense(rows))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_accelerated_methods(rows):
    m = ExactMatrix.from_dense(rows)
    exact = ela.rank(m)
    assert ela.rank(m, method="bounded") == exact
    assert ela.rank(m, method="multimodular") <= exact


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_echelon_basis_spans(rows):
    basis = ela.echelon_basis([dict(enumerate(r)) for r in rows], QQ)
    assert len(basis) == ela.rank(ExactMatrix.from_dense(rows))
