"""Determinantal hypersurfaces of pencils and their rank-one singularities.

A tuple (A_1, ..., A_r) determines the hypersurface cut out by
det(u_1 A_1 + ... + u_r A_r); when the A_i are real symmetric the surface
is a very real symmetroid.  Nodes are the points of u-space where the
evaluated pencil drops to rank 1; for tuples built from a rank-one span
they sit at the solutions of c^T u = e_j and are certified exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactlin import (
    Mat,
    as_rational,
    numeric_rank,
    primitive_point,
    rref,
    solve,
    vec_to_json,
)
from .locus import RankOneFamily, SpanCoefficients, span_tuple
from .pencil import LinearMatrix, MatrixTuple, MultiPoly, det_pencil, pencil_matrix, poly_det
from .config import PointConfig, Verdict, is_quadrilateral

__all__ = [
    "SymmetroidSurface",
    "NodeCertificate",
    "build_symmetroid",
    "verify_node",
    "structured_nodes",
    "cubic_system_from_points",
    "cubic_span_matrix",
    "sylvester_derivative_check",
    "CUBIC_MONOMIALS",
]


@dataclass(frozen=True)
class SymmetroidSurface:
    """det of a pencil together with the pencil itself.

    `very_real` records that every source operator is real symmetric.
    The defining form is only canonical up to a scalar; comparisons
    downstream are made projectively.
    """

    form: MultiPoly
    pencil: LinearMatrix
    very_real: bool
    m: int
    r: int

    def var_names(self):
        return [f"u{i+1}" for i in range(self.r)]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "very_real": self.very_real,
            "form": self.form.to_json(self.var_names()),
            "form_pretty": self.form.pretty(self.var_names()),
            "pencil": self.pencil.to_json(),
        }


@dataclass(frozen=True)
class NodeCertificate:
    point: tuple
    pencil_rank: int
    minor_residual: float

    @property
    def certified(self) -> bool:
        return self.pencil_rank <= 1

    def to_json(self) -> dict:
        pt = (
            vec_to_json(self.point)
            if all(isinstance(v, (int, Fraction)) for v in self.point)
            else [[complex(z).real, complex(z).imag] for z in self.point]
        )
        return {
            "point": pt,
            "pencil_rank": self.pencil_rank,
            "minor_residual": self.minor_residual,
            "certified": self.certified,
        }


def build_symmetroid(t: MatrixTuple) -> SymmetroidSurface:
    return SymmetroidSurface(
        form=det_pencil(t),
        pencil=pencil_matrix(t),
        very_real=t.symmetric,
        m=t.m,
        r=t.r,
    )


def verify_node(s: SymmetroidSurface, u: Sequence, tol: float = 1e-8) -> NodeCertificate:
    """Evaluate the pencil at u and certify rank <= 1.

    Rational points are decided exactly (residual 0); float points get
    the numeric rank and the largest 2 x 2 minor of the normalized
    evaluated pencil as residual.
    """
    us = list(u)
    if all(isinstance(v, (int, Fraction)) for v in us):
        if all(v == 0 for v in us):
            raise ValueError("zero vector is not a projective point")
        M = s.pencil.evaluate(us)
        rk = rref(M).rank
        return NodeCertificate(point=tuple(as_rational(v) for v in us), pencil_rank=rk, minor_residual=0.0)
    arr = np.asarray([complex(v) for v in us])
    if np.max(np.abs(arr)) == 0:
        raise ValueError("zero vector is not a projective point")
    arr = arr / np.linalg.norm(arr)
    M = s.pencil.evaluate_float(arr)
    scale = np.max(np.abs(M))
    if scale == 0:
        return NodeCertificate(point=tuple(arr), pencil_rank=0, minor_residual=0.0)
    N = M / scale
    worst = 0.0
    n = N.shape[0]
    for i, j in itertools.combinations(range(n), 2):
        for k, l in itertools.combinations(range(N.shape[1]), 2):
            worst = max(worst, abs(N[i, k] * N[j, l] - N[i, l] * N[j, k]))
    return NodeCertificate(
        point=tuple(complex(z) for z in arr),
        pencil_rank=numeric_rank(M, rel_tol=tol),
        minor_residual=float(worst),
    )


def structured_nodes(f: RankOneFamily, c: SpanCoefficients) -> list:
    """Nodes of the symmetroid of span_tuple(f, c).

    Solving c^T u = e_j makes the pencil evaluate to the rank-one E_j,
    so the m + 1 solutions are certified nodes; they are the coordinate
    points exactly when c is the identity.
    """
    ct = c.a.transpose()
    if ct.rows != ct.cols or ct.det() == 0:
        raise ValueError("coefficient matrix must be invertible")
    surface = build_symmetroid(span_tuple(f, c))
    n = ct.rows
    out = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        u = solve(ct, e)
        cert = verify_node(surface, primitive_point(u))
        out.append(cert)
    return out


# ---------------------------------------------------------------------------
# the cubic linear system through six points

# degree-3 monomials in (x, y, z), graded lexicographic order
CUBIC_MONOMIALS = tuple(
    sorted(
        (
            (i, j, 3 - i - j)
            for i in range(4)
            for j in range(4 - i)
        ),
        key=lambda e: tuple(-v for v in e),
    )
)


def cubic_system_from_points(pc: PointConfig) -> list:
    """Basis of the cubics vanishing at six quadrilateral points.

    The kernel of the 6 x 10 evaluation matrix on the cubic monomial
    basis must be 4-dimensional; the returned basis is the canonical
    reduced-echelon one, so it is independent of point order.
    """
    if len(pc) != 6 or pc.dim() != 3:
        raise ValueError("need six points in P^2")
    if not pc.exact:
        raise ValueError("cubic system construction needs exact points")
    report = is_quadrilateral(pc)
    if report.verdict is not Verdict.QUADRILATERAL:
        raise ValueError("points do not form a quadrilateral set")
    rows = []
    for p in pc.points:
        rows.append([p[0] ** e[0] * p[1] ** e[1] * p[2] ** e[2] for e in CUBIC_MONOMIALS])
    res = rref(Mat(rows))
    kern = res.kernel
    if kern.dim != 4:
        raise ValueError(f"cubic system has dimension {kern.dim}, expected 4 (non-generic input)")
    polys = []
    for vec in kern.basis_vectors():
        polys.append(MultiPoly(3, {e: c for e, c in zip(CUBIC_MONOMIALS, vec)}))
    return polys


def cubic_span_matrix(polys: Sequence[MultiPoly]) -> Mat:
    """Canonical reduced coefficient matrix of a span of cubics.

    Two lists of cubics span the same subspace of the 10-dimensional
    coefficient space iff their canonical matrices are equal.
    """
    rows = [[p.coefficient(e) for e in CUBIC_MONOMIALS] for p in polys]
    from .exactlin import Subspace

    S = Subspace.from_spanning(rows, len(CUBIC_MONOMIALS))
    return Mat(S.basis_vectors())


# ---------------------------------------------------------------------------
# the derivative identity for the standard family


def sylvester_derivative_check(m: int) -> bool:
    """Pencil determinant of the standard rank-one family versus the
    all-ones directional derivative of u_1 u_2 ... u_{m+1}.

    The family is v_j = e_j for j <= m plus the all-ones vector, with
    A_j = v_j v_j^T.  Both sides are expanded exactly; the direction for
    the derivative is the all-ones vector, which makes the identity
    exact rather than up to scale.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    vs = [[int(i == j) for i in range(m)] for j in range(m)] + [[1] * m]
    fam = RankOneFamily.from_vectors(vs)
    t = span_tuple(fam, SpanCoefficients.identity(m + 1))
    lhs = det_pencil(t)
    prod = MultiPoly.const(m + 1, 1)
    for j in range(m + 1):
        prod = prod * MultiPoly.variable(j, m + 1)
    rhs = MultiPoly.zero(m + 1)
    for j in range(m + 1):
        rhs = rhs + prod.partial(j)
    return lhs == rhs
