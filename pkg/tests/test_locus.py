import itertools
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_generic_family, random_invertible, random_symmetric_tuple
from deglab.exactlin import Mat, Subspace, primitive_point
from deglab.locus import (
    DecompositionError,
    DegenerateFamilyError,
    RankOneFamily,
    SpanCoefficients,
    decompose_symmetric_tuple,
    fiber_system,
    membership,
    solve_locus_p2,
    span_tuple,
    structured_locus,
)
from deglab.pencil import MatrixTuple, MultiPoly, build_L, maximal_minors


# ---------------------------------------------------------------------------
# span_tuple


def test_span_identity_reproduces_family(std_family):
    t = span_tuple(std_family, SpanCoefficients.identity(4))
    assert t.matrices == std_family.E


def test_span_cayley_matrices(std_family, cayley_tuple):
    t = span_tuple(std_family, SpanCoefficients.identity(4))
    assert t.matrices == cayley_tuple.matrices


def test_span_is_exact_linear_combination(std_family):
    c = SpanCoefficients.from_rows([[1, 2, 0, -1], [3, 1, 1, 0], [0, 0, 2, 5], [1, 1, 1, 1]])
    t = span_tuple(std_family, c)
    for i in range(4):
        expect = Mat.zeros(3, 3)
        for j, E in enumerate(std_family.E):
            expect = expect + c.a[i, j] * E
        assert t.matrices[i] == expect


# ---------------------------------------------------------------------------
# structured locus


def test_structured_locus_standard_points(std_family, std_points):
    res = structured_locus(std_family)
    assert res.degree == 6
    assert res.all_real
    assert res.exact_point_set() == std_points
    assert all(c.exact and c.residual == 0.0 for c in res.components)


def test_structured_locus_ten_lines(desargues_family):
    res = structured_locus(desargues_family)
    assert len(res.components) == 10
    assert all(c.subspace.projective_dim == 1 for c in res.components)


def test_structured_locus_m5_fifteen_planes():
    vs = [[int(i == j) for i in range(5)] for j in range(5)] + [[1] * 5]
    fam = RankOneFamily.from_vectors(vs)
    res = structured_locus(fam)
    assert len(res.components) == 15
    assert all(c.subspace.projective_dim == 2 for c in res.components)
    # every maximal minor vanishes identically on every component: compose
    # each minor with a linear parametrization of the component
    minors = maximal_minors(build_L(span_tuple(fam, SpanCoefficients.identity(6))))
    for comp in res.components:
        basis = comp.subspace.basis_vectors()
        params = [MultiPoly.variable(k, len(basis)) for k in range(len(basis))]
        coords = []
        for i in range(5):
            acc = MultiPoly.zero(len(basis))
            for k, vec in enumerate(basis):
                acc = acc + vec[i] * params[k]
            coords.append(acc)
        for p in minors:
            assert p.evaluate(coords).is_zero()


def test_structured_locus_rejects_degenerate_family():
    fam = RankOneFamily.from_vectors([[1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1]])
    assert not fam.generic
    with pytest.raises(DegenerateFamilyError, match="E_{1, 2, 3}"):
        structured_locus(fam)


def test_labels_cover_all_pairs(desargues_family):
    res = structured_locus(desargues_family)
    labels = {c.label for c in res.components}
    assert labels == set(tuple(sorted(p)) for p in itertools.combinations(range(1, 6), 2))


# ---------------------------------------------------------------------------
# numeric solver


def _matches_exact_set(loc, exact_points):
    targets = []
    for p in exact_points:
        v = np.array(p, dtype=float)
        targets.append(v / np.linalg.norm(v))
    for c in loc.components:
        z = np.array(c.point)
        if not any(abs(abs(np.vdot(z, t)) - 1.0) < 1e-7 for t in targets):
            return False
    return len(loc.components) == len(exact_points)


def test_numeric_matches_structured_oracle(std_family, std_tuple):
    oracle = structured_locus(std_family).exact_point_set()
    loc = solve_locus_p2(std_tuple)
    assert loc.all_real
    assert _matches_exact_set(loc, oracle)


def test_numeric_on_real_chamber_tuple():
    t = random_symmetric_tuple(1)
    loc = solve_locus_p2(t)
    assert len(loc.components) == 6
    assert loc.degree == 6
    assert loc.all_real
    assert max(c.residual for c in loc.components) < 1e-8


def test_numeric_on_complex_chamber_tuple():
    # a symmetric tuple whose rank-one directions are complex: the six
    # locus points split into 2 real and 2 conjugate pairs
    t = random_symmetric_tuple(0)
    loc = solve_locus_p2(t)
    assert len(loc.components) == 6
    assert sum(1 for c in loc.components if c.real) == 2
    assert not loc.all_real


def test_numeric_five_tuple_empty():
    t = random_symmetric_tuple(17, r=5)
    loc = solve_locus_p2(t)
    assert len(loc.components) == 0
    assert loc.degree == 0


def test_numeric_five_tuple_grid_oracle():
    # independent residual scan: the smallest max-minor value over a
    # 200 x 200 chart grid stays far above zero
    t = random_symmetric_tuple(23, r=5)
    minors = maximal_minors(build_L(t))
    xs = np.linspace(-3, 3, 200)
    grid_min = np.inf
    X, Y = np.meshgrid(xs, xs)
    vals = None
    for p in minors:
        acc = np.zeros_like(X)
        for e, c in p.terms.items():
            acc = acc + float(c) * X ** e[0] * Y ** e[1]
        norm = (X**2 + Y**2 + 1.0) ** 1.5
        v = np.abs(acc) / norm
        vals = v if vals is None else np.maximum(vals, v)
    grid_min = vals.min()
    assert grid_min > 1e-4
    assert len(solve_locus_p2(t).components) == 0


def test_solver_requires_m3():
    t = MatrixTuple.from_matrices([Mat.identity(4)] * 5)
    with pytest.raises(ValueError):
        solve_locus_p2(t)


def test_every_solver_point_passes_membership():
    t = random_symmetric_tuple(6)
    loc = solve_locus_p2(t)
    for c in loc.components:
        assert membership(t, list(c.point), tol=1e-6)


# ---------------------------------------------------------------------------
# membership


def test_membership_cayley_coordinate_point(cayley_tuple):
    assert membership(cayley_tuple, [0, 0, 1])


def test_membership_single_identity():
    t = MatrixTuple.from_matrices([Mat.identity(3)])
    assert membership(t, [2, 5, -1])


def test_membership_rejects_generic_point(std_tuple):
    assert not membership(std_tuple, [1, 1, 1])


def test_membership_rejects_zero_vector(std_tuple):
    with pytest.raises(ValueError):
        membership(std_tuple, [0, 0, 0])


# ---------------------------------------------------------------------------
# decomposition


def test_decompose_cayley_recovers_frame(cayley_tuple, std_family):
    fam, coeffs = decompose_symmetric_tuple(cayley_tuple)
    assert set(fam.kernels) == set(std_family.kernels)
    # coefficients are the identity up to scaling and permutation
    for i in range(4):
        row = [coeffs.a[i, j] for j in range(4)]
        assert sum(1 for v in row if v != 0) == 1


def test_decompose_span_round_trip():
    fam = random_generic_family(3)
    c = SpanCoefficients(random_invertible(4, 4))
    t = span_tuple(fam, c)
    assert t.symmetric
    fam2, c2 = decompose_symmetric_tuple(t)
    assert set(fam2.kernels) == set(fam.kernels)
    assert span_tuple(fam2, c2).matrices == t.matrices


def test_decompose_recipe_tuple():
    vs = [[1, 2, 0], [0, 1, -1], [3, 0, 1], [1, 1, 1]]
    fam = RankOneFamily.from_vectors(vs)
    t = span_tuple(fam, SpanCoefficients.identity(4))
    fam2, _ = decompose_symmetric_tuple(t)
    assert set(fam2.kernels) == set(fam.kernels)


def test_decompose_rejects_complex_chamber():
    t = random_symmetric_tuple(0)
    with pytest.raises(DecompositionError, match="real"):
        decompose_symmetric_tuple(t)


def test_decompose_requires_symmetric():
    t = MatrixTuple.from_arrays([
        [[1, 2, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 1, 0], [1, 0, 1]],
        [[1, 0, 0], [0, 1, 0], [0, 1, 1]],
    ])
    with pytest.raises(ValueError):
        decompose_symmetric_tuple(t)


# ---------------------------------------------------------------------------
# fiber system


def test_fiber_system_known_matrix():
    Q, rank = fiber_system(
        Mat([[3, 5, 6], [7, 2, 4], [5, 2, 8]]),
        Mat([[1, 4, 3], [5, 3, 2], [5, 1, 7]]),
    )
    assert Q == Mat([
        [90, 64, -90, -64, 0, 0],
        [-6, -12, 0, 0, 6, 12],
        [0, 0, 68, 37, -68, -37],
    ])
    assert rank == 3


def test_fiber_system_equal_matrices_vanishes():
    A = Mat([[3, 5, 6], [7, 2, 4], [5, 2, 8]])
    Q, rank = fiber_system(A, A)
    assert Q.is_zero()
    assert rank == 0


def test_fiber_system_random_full_rank():
    rng = random.Random(31)
    for trial in range(20):
        A1 = Mat([[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)])
        A2 = Mat([[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)])
        _, rank = fiber_system(A1, A2)
        assert rank == 3, f"trial {trial}"


# ---------------------------------------------------------------------------
# invariance properties


def test_coefficient_independence(std_family):
    base = structured_locus(std_family)
    for trial in range(10):
        c = SpanCoefficients(random_invertible(100 + trial, 4))
        t = span_tuple(std_family, c)
        minors = maximal_minors(build_L(t))
        for comp in base.components:
            point = list(comp.subspace.basis_vectors()[0])
            assert membership(t, point)
            assert all(p.evaluate(point) == 0 for p in minors)


def test_gl_equivariance():
    fam = random_generic_family(11)
    base_points = structured_locus(fam).exact_point_set()
    for trial in range(20):
        A = random_invertible(200 + trial, 3)
        Ainv = A.inverse()
        moved = RankOneFamily.from_matrices([E * Ainv for E in fam.E])
        moved_points = structured_locus(moved).exact_point_set()
        expect = {primitive_point(A.matvec(p)) for p in base_points}
        assert moved_points == expect


@pytest.mark.parametrize("m", [3, 4, 5])
def test_degree_law(m):
    fam = random_generic_family(50 + m, m=m)
    res = structured_locus(fam)
    assert res.degree == m * (m + 1) // 2
    assert len(res.components) == res.degree


def test_solver_degree_on_generic_tuples():
    for seed in (2, 4, 8):
        t = random_symmetric_tuple(seed)
        loc = solve_locus_p2(t)
        assert loc.degree == 6


# ---------------------------------------------------------------------------
# serialization


def test_locus_result_json(std_family, std_tuple):
    exact = structured_locus(std_family).to_json()
    assert exact["degree"] == 6
    assert all(set(c) >= {"label", "exact", "residual"} for c in exact["components"])
    numeric = solve_locus_p2(std_tuple).to_json()
    assert numeric["degree"] == 6
    for comp in numeric["components"]:
        assert all(len(pair) == 2 for pair in comp["point"])
