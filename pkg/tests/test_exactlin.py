import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deglab.exactlin import (
    Mat,
    Subspace,
    cross3,
    intersect,
    numeric_rank,
    parse_rational,
    primitive_point,
    rank,
    rational_str,
    rref,
    solve,
    span_sum,
)

small_fractions = st.fractions(min_value=-9, max_value=9, max_denominator=6)


def small_matrix(rows, cols):
    return st.lists(
        st.lists(small_fractions, min_size=cols, max_size=cols),
        min_size=rows,
        max_size=rows,
    ).map(Mat)


# ---------------------------------------------------------------------------
# rref


def test_rref_identity():
    res = rref(Mat.identity(3))
    assert res.rank == 3
    assert res.kernel.dim == 0
    assert res.pivots == (0, 1, 2)


def test_rref_rank_one_outer():
    E = Mat.outer([1, 1, 1], [1, 1, 1])
    res = rref(E)
    assert res.rank == 1
    expected = Subspace.from_spanning([[1, -1, 0], [1, 0, -1]], 3)
    assert res.kernel == expected


def test_rref_known_3x6_full_rank():
    Q = Mat([
        [90, 64, -90, -64, 0, 0],
        [-6, -12, 0, 0, 6, 12],
        [0, 0, 68, 37, -68, -37],
    ])
    assert rref(Q).rank == 3


def test_kernel_vectors_annihilate():
    M = Mat([[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, 1, 0]])
    res = rref(M)
    assert res.rank == 2
    for v in res.kernel.basis_vectors():
        assert all(x == 0 for x in M.matvec(v))


@given(small_matrix(3, 4))
def test_rank_equals_transpose_rank(M):
    assert rank(M) == rank(M.transpose())


# ---------------------------------------------------------------------------
# subspaces


def test_intersect_coordinate_planes():
    s1 = Subspace.from_spanning([[0, 1, 0], [0, 0, 1]], 3)  # x1 = 0
    s2 = Subspace.from_spanning([[1, 0, 0], [0, 0, 1]], 3)  # x2 = 0
    assert intersect(s1, s2) == Subspace.from_spanning([[0, 0, 1]], 3)


def test_intersect_plane_with_sum_zero_plane():
    s1 = Subspace.from_spanning([[1, 0, 0], [0, 1, 0]], 3)  # x3 = 0
    s2 = rref(Mat([[1, 1, 1]])).kernel  # x1 + x2 + x3 = 0
    line = intersect(s1, s2)
    assert line.dim == 1
    assert primitive_point(line.basis_vectors()[0]) == (1, -1, 0)


def test_intersect_idempotent():
    s = Subspace.from_spanning([[1, 2, 3], [0, 1, 1]], 3)
    assert intersect(s, s) == s


def test_intersect_ambient_mismatch():
    s1 = Subspace.from_spanning([[1, 0]], 2)
    s2 = Subspace.from_spanning([[1, 0, 0]], 3)
    with pytest.raises(ValueError):
        intersect(s1, s2)


def test_subspace_canonical_across_bases():
    a = Subspace.from_spanning([[1, 1, 0], [0, 1, 1]], 3)
    b = Subspace.from_spanning([[2, 3, 1], [1, 0, -1], [3, 3, 0]], 3)
    assert a == b
    assert a.basis_vectors() == b.basis_vectors()
    assert hash(a) == hash(b)


@given(small_matrix(4, 2), small_matrix(4, 2))
def test_dimension_formula(B1, B2):
    s1 = Subspace.from_spanning([B1.col(j) for j in range(2)], 4)
    s2 = Subspace.from_spanning([B2.col(j) for j in range(2)], 4)
    lhs = s1.dim + s2.dim
    rhs = intersect(s1, s2).dim + span_sum(s1, s2).dim
    assert lhs == rhs


def test_contains_and_coordinates():
    s = Subspace.from_spanning([[1, 0, 1], [0, 1, 1]], 3)
    assert s.contains([1, 1, 2])
    assert not s.contains([1, 0, 0])
    coords = s.coordinates_of([1, 1, 2])
    assert s.basis.matvec(coords) == (Fraction(1), Fraction(1), Fraction(2))


# ---------------------------------------------------------------------------
# cross product and points


def test_cross3_coordinate_axes():
    assert cross3([1, 0, 0], [0, 1, 0]) == (0, 0, 1)


def test_cross3_two_quadrilateral_points():
    # expanding the 2x2 minors of [[1,-1,0],[1,0,-1]] by hand gives (1,1,1)
    assert cross3([1, -1, 0], [1, 0, -1]) == (1, 1, 1)


def test_cross3_parallel_is_zero():
    assert cross3([2, -3, 5], [2, -3, 5]) == (0, 0, 0)


def test_primitive_point_normalization():
    assert primitive_point([Fraction(-1, 2), Fraction(1, 2), 0]) == (1, -1, 0)
    assert primitive_point([0, Fraction(2, 3), Fraction(4, 3)]) == (0, 1, 2)
    with pytest.raises(ValueError):
        primitive_point([0, 0, 0])


# ---------------------------------------------------------------------------
# solving and determinants


def test_solve_consistent_and_inconsistent():
    A = Mat([[1, 2], [3, 4], [4, 6]])
    x = solve(A, [5, 11, 16])
    assert x is not None and A.matvec(x) == (5, 11, 16)
    assert solve(A, [1, 0, 0]) is None


def test_inverse_round_trip():
    M = Mat([[2, 1, 0], [1, 3, 1], [0, 1, 1]])
    assert M * M.inverse() == Mat.identity(3)


@given(small_matrix(3, 3), small_matrix(3, 3))
def test_det_multiplicative(A, B):
    assert (A * B).det() == A.det() * B.det()


# ---------------------------------------------------------------------------
# numeric mirror


def test_numeric_rank_identity():
    assert numeric_rank(np.eye(4), 1e-8) == 4


def test_numeric_rank_threshold_forced():
    assert numeric_rank(np.diag([1.0, 1e-12]), 1e-8) == 1


def test_numeric_rank_outer_product():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(3)
    assert numeric_rank(np.outer(v, v), 1e-8) == 1


def test_numeric_rank_zero_matrix():
    assert numeric_rank(np.zeros((3, 3)), 1e-8) == 0


def test_numeric_rank_rejects_nonfinite():
    with pytest.raises(ValueError):
        numeric_rank(np.array([[np.nan, 0.0], [0.0, 1.0]]), 1e-8)
    with pytest.raises(ValueError):
        numeric_rank(np.eye(2), rel_tol=2.0)


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=3))
def test_numeric_rank_matches_exact_on_integers(rows):
    M = Mat(rows)
    exact = rank(M)
    A = M.to_float_array()
    s = np.linalg.svd(A, compute_uv=False)
    # only compare when the spectrum is clearly separated at the threshold
    if s[0] > 0 and not np.any((s > 1e-10 * s[0]) & (s < 1e-6 * s[0])):
        assert numeric_rank(A, 1e-8) == exact


# ---------------------------------------------------------------------------
# serialization


def test_rational_strings():
    assert rational_str(Fraction(3, 1)) == "3"
    assert rational_str(Fraction(-2, 7)) == "-2/7"
    assert parse_rational("-2/7") == Fraction(-2, 7)
    assert parse_rational("5") == 5


@given(small_fractions)
def test_rational_string_round_trip(q):
    assert parse_rational(rational_str(q)) == q
