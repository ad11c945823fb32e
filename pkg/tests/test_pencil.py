import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from deglab.exactlin import Mat
from deglab.locus import RankOneFamily, SpanCoefficients, span_tuple
from deglab.pencil import (
    LinearMatrix,
    MatrixTuple,
    MultiPoly,
    build_L,
    det_pencil,
    hilbert_burch_swap,
    maximal_minors,
    pencil_matrix,
    poly_det,
)

U = [MultiPoly.variable(i, 4) for i in range(4)]


def sylvester_tuple():
    vs = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1]]
    fam = RankOneFamily.from_vectors(vs)
    return span_tuple(fam, SpanCoefficients.identity(5))


# ---------------------------------------------------------------------------
# build_L


def test_build_l_diagonal_family_shape():
    L = build_L(sylvester_tuple())
    assert (L.rows, L.cols, L.num_vars) == (4, 5, 4)
    x = [MultiPoly.variable(i, 4) for i in range(4)]
    s = x[0] + x[1] + x[2] + x[3]
    for i in range(4):
        for j in range(4):
            assert L.entry(i, j) == (x[i] if i == j else MultiPoly.zero(4))
        assert L.entry(i, 4) == s


def test_build_l_zero_tuple():
    t = MatrixTuple.from_matrices([Mat.zeros(3, 3), Mat.zeros(3, 3)])
    L = build_L(t)
    assert all(c == 0 for row in L.tensor for cell in row for c in cell)


def test_build_l_evaluation_at_basis_vector(cayley_tuple):
    L = build_L(cayley_tuple)
    M = L.evaluate([1, 0, 0])
    for j, A in enumerate(cayley_tuple.matrices):
        assert M.col(j) == A.col(0)


# ---------------------------------------------------------------------------
# maximal minors


def test_minor_counts_and_degrees(cayley_tuple):
    ms = maximal_minors(build_L(cayley_tuple))
    assert len(ms) == 4
    assert all(p.total_degree() == 3 for p in ms)
    ms5 = maximal_minors(build_L(sylvester_tuple()))
    assert len(ms5) == 5
    assert all(p.total_degree() == 4 for p in ms5)


def test_minors_need_wide_matrix():
    tall = LinearMatrix([[[1, 0]], [[0, 1]]])  # 2 x 1 in 2 vars
    with pytest.raises(ValueError):
        maximal_minors(tall)


def test_minors_vanish_at_double_kernel_point(std_tuple):
    ms = maximal_minors(build_L(std_tuple))
    assert all(p.evaluate([1, -1, 0]) == 0 for p in ms)


# ---------------------------------------------------------------------------
# the swap


def test_swap_on_cayley_matches_known_pencil(cayley_tuple):
    W = hilbert_burch_swap(build_L(cayley_tuple))
    assert (W.rows, W.cols, W.num_vars) == (3, 3, 4)
    u1, u2, u3, u4 = U
    expect = [[u1 + u4, u4, u4], [u4, u2 + u4, u4], [u4, u4, u3 + u4]]
    rows = W.poly_rows()
    assert all(rows[i][j] == expect[i][j] for i in range(3) for j in range(3))


def test_swap_is_involution(cayley_tuple):
    L = build_L(cayley_tuple)
    assert hilbert_burch_swap(hilbert_burch_swap(L)) == L


def test_swap_on_diagonal_family_gives_ones_pencil():
    t = sylvester_tuple()
    W = hilbert_burch_swap(build_L(t))
    u = [MultiPoly.variable(i, 5) for i in range(5)]
    rows = W.poly_rows()
    for i in range(4):
        for j in range(4):
            expect = u[i] + u[4] if i == j else u[4]
            assert rows[i][j] == expect
    assert W == pencil_matrix(t)


def test_bilinear_identity_on_random_rationals(cayley_tuple):
    L = build_L(cayley_tuple)
    W = hilbert_burch_swap(L)
    rng = random.Random(2)
    for _ in range(100):
        x = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
        u = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(4)]
        assert L.evaluate(x).matvec(u) == W.evaluate(u).matvec(x)


# ---------------------------------------------------------------------------
# pencil determinants


def test_cayley_determinant(cayley_tuple):
    u1, u2, u3, u4 = U
    assert det_pencil(cayley_tuple) == u1 * u2 * u3 + u1 * u2 * u4 + u1 * u3 * u4 + u2 * u3 * u4


def test_negated_diagonal_pencil_determinant():
    t = MatrixTuple.from_arrays([
        [[-1, 0, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, -1, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 0, -1]],
        [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
    ])
    u1, u2, u3, u4 = U
    assert det_pencil(t) == 2 * u4**3 + u4**2 * (u1 + u2 + u3) - u1 * u2 * u3


def test_identity_only_tuple_determinant():
    t = MatrixTuple.from_matrices([Mat.identity(4)])
    u1 = MultiPoly.variable(0, 1)
    assert det_pencil(t) == u1**4


def test_det_pencil_at_basis_vectors_matches_det():
    rng = random.Random(5)
    mats = [Mat([[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]) for _ in range(4)]
    t = MatrixTuple.from_matrices(mats)
    f = det_pencil(t)
    for i, A in enumerate(mats):
        e = [Fraction(int(k == i)) for k in range(4)]
        assert f.evaluate(e) == A.det()


def test_poly_det_matches_scalar_det():
    rng = random.Random(9)
    rows = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)]
    M = Mat(rows)
    polys = [[MultiPoly.const(1, v) for v in row] for row in rows]
    assert poly_det(polys) == MultiPoly.const(1, M.det())


# ---------------------------------------------------------------------------
# MultiPoly ring behavior

polys = st.builds(
    lambda terms: MultiPoly(3, {tuple(e): c for e, c in terms}),
    st.lists(
        st.tuples(
            st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
            st.fractions(min_value=-9, max_value=9, max_denominator=5),
        ),
        max_size=5,
    ),
)


@given(polys, polys)
def test_addition_commutes(p, q):
    assert p + q == q + p


@given(polys, polys)
def test_multiplication_commutes(p, q):
    assert p * q == q * p


@given(polys, polys, polys)
def test_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polys, polys, polys)
def test_multiplication_associates(p, q, r):
    assert (p * q) * r == p * (q * r)


def test_partial_derivative_and_power():
    x, y, z = (MultiPoly.variable(i, 3) for i in range(3))
    f = (x + y) ** 2 * z
    assert f.partial(0) == 2 * (x + y) * z
    assert f.partial(2) == (x + y) ** 2


def test_composition_with_polynomials():
    x, y = (MultiPoly.variable(i, 2) for i in range(2))
    f = x**2 + y
    a, b, c = (MultiPoly.variable(i, 3) for i in range(3))
    composed = f.evaluate([a + b, c])
    assert composed == (a + b) ** 2 + c


def test_fix_var_dehomogenizes():
    x, y, z = (MultiPoly.variable(i, 3) for i in range(3))
    f = x * y * z + z**3
    g = f.fix_var(2, 1)
    assert g == x * y + MultiPoly.const(3, 1)


# ---------------------------------------------------------------------------
# printing and serialization


def test_pretty_uses_graded_lex_order(cayley_tuple):
    f = det_pencil(cayley_tuple)
    assert f.pretty(["u1", "u2", "u3", "u4"]) == "u1*u2*u3 + u1*u2*u4 + u1*u3*u4 + u2*u3*u4"


def test_multipoly_json_round_trip(cayley_tuple):
    f = det_pencil(cayley_tuple)
    obj = f.to_json(["u1", "u2", "u3", "u4"])
    assert obj["vars"] == ["u1", "u2", "u3", "u4"]
    assert all(set(t) == {"exps", "coeff"} for t in obj["terms"])
    assert MultiPoly.from_json(obj) == f


def test_linear_matrix_json_round_trip(cayley_tuple):
    L = build_L(cayley_tuple)
    assert LinearMatrix.from_json(L.to_json()) == L


def test_matrix_tuple_json_round_trip(cayley_tuple):
    assert MatrixTuple.from_json(cayley_tuple.to_json()) == cayley_tuple
    assert cayley_tuple.symmetric
