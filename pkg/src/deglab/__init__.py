"""Degeneracy loci of matrix tuples, their configurations and symmetroids."""

from .exactlin import (
    Mat,
    Rational,
    Subspace,
    cross3,
    intersect,
    numeric_rank,
    primitive_point,
    rank,
    rref,
    span_sum,
)
from .pencil import (
    LinearMatrix,
    MatrixTuple,
    MultiPoly,
    build_L,
    det_pencil,
    hilbert_burch_swap,
    maximal_minors,
    pencil_matrix,
)

__version__ = "0.1.0"
