"""Exact rational linear algebra on small dense matrices.

Entries are `fractions.Fraction`, so every operation in this module is
exact.  Row reduction clears denominators and then runs fraction-free
(Bareiss) elimination, which keeps intermediate integers small on the
integer matrices that dominate this problem domain.  `numeric_rank` is
the floating-point mirror used by the numeric locus solver.

All values are immutable after construction; operations are pure.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Rational",
    "as_rational",
    "rational_str",
    "parse_rational",
    "Mat",
    "RrefResult",
    "rref",
    "rank",
    "solve",
    "Subspace",
    "intersect",
    "span_sum",
    "cross3",
    "primitive_point",
    "numeric_rank",
]

Rational = Fraction


def as_rational(x) -> Fraction:
    """Coerce ints, strings like "3/4", and floats (exactly) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str, float)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def rational_str(q: Fraction) -> str:
    q = as_rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(s) -> Fraction:
    return as_rational(s)


class Mat:
    """Dense matrix with Fraction entries, immutable and hashable."""

    __slots__ = ("rows", "cols", "_d")

    def __init__(self, rows_of_entries: Iterable[Iterable]):
        data = tuple(tuple(as_rational(x) for x in row) for row in rows_of_entries)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        cols = len(data[0])
        if any(len(r) != cols for r in data):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "_d", data)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "Mat":
        return cls([[0] * c for _ in range(r)])

    @classmethod
    def diag(cls, entries: Sequence) -> "Mat":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def outer(cls, u: Sequence, v: Sequence) -> "Mat":
        uu = [as_rational(x) for x in u]
        vv = [as_rational(x) for x in v]
        return cls([[a * b for b in vv] for a in uu])

    @classmethod
    def column_stack(cls, columns: Sequence[Sequence]) -> "Mat":
        cols = [list(c) for c in columns]
        n = len(cols[0])
        return cls([[cols[j][i] for j in range(len(cols))] for i in range(n)])

    # -- access -------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self._d[i][j]

    def row(self, i: int) -> tuple:
        return self._d[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._d)

    def to_lists(self) -> list:
        return [list(r) for r in self._d]

    def to_float_array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self._d], dtype=float)

    # -- algebra ------------------------------------------------------
    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._d, other._d)])

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self._d, other._d)])

    def __neg__(self) -> "Mat":
        return Mat([[-a for a in r] for r in self._d])

    def __mul__(self, other):
        if isinstance(other, Mat):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} * {other.shape}")
            ot = other.transpose()._d
            return Mat([[sum(a * b for a, b in zip(r, c)) for c in ot] for r in self._d])
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Mat":
        c = as_rational(c)
        return Mat([[c * a for a in r] for r in self._d])

    def matvec(self, v: Sequence) -> tuple:
        vv = [as_rational(x) for x in v]
        if len(vv) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(r, vv)) for r in self._d)

    def transpose(self) -> "Mat":
        return Mat([[self._d[i][j] for i in range(self.rows)] for j in range(self.cols)])

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self._d[i][j] == self._d[j][i] for i in range(self.rows) for j in range(i)
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._d for x in r)

    def det(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        int_rows, scale = _integer_rows(self._d)
        return Fraction(_bareiss_det(int_rows), scale)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        aug = [list(self._d[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        reduced, _, pivots = _reduce_rows(aug)
        if len(pivots) < n or any(p >= n for p in pivots):
            raise ValueError("matrix is singular")
        return Mat([row[n:] for row in reduced[:n]])

    # -- identity / hashing -------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Mat) and self._d == other._d

    def __hash__(self):
        return hash(self._d)

    def __repr__(self):
        body = "; ".join(" ".join(rational_str(x) for x in r) for r in self._d)
        return f"Mat[{body}]"

    def _same_shape(self, other: "Mat"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")


# ---------------------------------------------------------------------------
# fraction-free elimination


def _integer_rows(data, remove_content: bool = False):
    """Clear denominators row by row.  Returns (int rows, global det scale)."""
    out = []
    scale = 1
    for row in data:
        den = math.lcm(*(x.denominator for x in row))
        ints = [int(x * den) for x in row]
        if remove_content:
            g = math.gcd(*ints)
            if g > 1:
                ints = [v // g for v in ints]
                den = Fraction(den, g)
        scale *= den
        out.append(ints)
    return out, scale


def _bareiss_eliminate(rows):
    """In-place fraction-free row echelon; returns (pivot (row, col) list, swaps)."""
    m, n = len(rows), len(rows[0])
    pivots = []
    swaps = 0
    prev = 1
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
            swaps += 1
        piv = rows[r][c]
        for i in range(r + 1, m):
            ric = rows[i][c]
            ri, rr = rows[i], rows[r]
            for j in range(c, n):
                ri[j] = (piv * ri[j] - ric * rr[j]) // prev
        pivots.append((r, c))
        prev = piv
        r += 1
        if r == m:
            break
    return pivots, swaps


def _bareiss_det(rows) -> int:
    n = len(rows)
    pivots, swaps = _bareiss_eliminate(rows)
    if len(pivots) < n:
        return 0
    d = rows[n - 1][pivots[-1][1]]
    return -d if swaps % 2 else d


def _reduce_rows(rows):
    """Full reduced row echelon over Fractions.

    Returns (reduced rows, rank, pivot column list).  The reduced form is
    canonical: pivot entries 1, zeros above and below every pivot, zero
    rows trailing.
    """
    work = [[as_rational(x) for x in row] for row in rows]
    m, n = len(work), len(work[0])
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if work[i][c] != 0), None)
        if pr is None:
            continue
        work[r], work[pr] = work[pr], work[r]
        piv = work[r][c]
        work[r] = [x / piv for x in work[r]]
        for i in range(m):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return work, len(pivots), pivots


class RrefResult(NamedTuple):
    rank: int
    kernel: "Subspace"
    pivots: tuple


def rref(M: Mat) -> RrefResult:
    """Exact rank, right kernel and pivot columns of M.

    The forward pass is fraction-free on the denominator-cleared integer
    matrix; kernel vectors come from exact back substitution, so
    M * v = 0 holds exactly for every kernel basis vector.
    """
    rows, _ = _integer_rows(M._d, remove_content=True)
    pivots, _ = _bareiss_eliminate(rows)
    n = M.cols
    piv_cols = [c for _, c in pivots]
    free_cols = [c for c in range(n) if c not in piv_cols]
    basis = []
    for f in free_cols:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, c in reversed(pivots):
            s = sum(rows[r][j] * x[j] for j in range(c + 1, n))
            x[c] = Fraction(-s, rows[r][c])
        basis.append(tuple(x))
    kernel = Subspace.from_spanning(basis, ambient_dim=n)
    return RrefResult(len(pivots), kernel, tuple(piv_cols))


def rank(M: Mat) -> int:
    rows, _ = _integer_rows(M._d, remove_content=True)
    pivots, _ = _bareiss_eliminate(rows)
    return len(pivots)


def solve(A: Mat, b: Sequence):
    """One exact solution of A x = b, or None if the system is inconsistent.

    Free variables are set to zero.
    """
    bb = [as_rational(x) for x in b]
    if len(bb) != A.rows:
        raise ValueError("right-hand side length mismatch")
    aug = [list(A._d[i]) + [bb[i]] for i in range(A.rows)]
    reduced, _, pivots = _reduce_rows(aug)
    if A.cols in pivots:
        return None
    x = [Fraction(0)] * A.cols
    for r, c in enumerate(pivots):
        x[c] = reduced[r][A.cols]
    return tuple(x)


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """Linear subspace of Q^n in canonical reduced echelon form.

    The stored basis is the reduced row echelon form of any spanning set,
    transposed into columns.  Two equal subspaces therefore compare equal
    bit for bit, which makes configurations comparable as sets.
    """

    __slots__ = ("ambient_dim", "dim", "_basis_rows")

    def __init__(self, ambient_dim: int, _basis_rows: tuple):
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "dim", len(_basis_rows))
        object.__setattr__(self, "_basis_rows", _basis_rows)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def from_spanning(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        vecs = [[as_rational(x) for x in v] for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ValueError("spanning vector has wrong length")
        if not vecs:
            return cls(ambient_dim, ())
        reduced, rk, _ = _reduce_rows(vecs)
        return cls(ambient_dim, tuple(tuple(r) for r in reduced[:rk]))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.from_spanning([[int(i == j) for j in range(ambient_dim)] for i in range(ambient_dim)], ambient_dim)

    # -- views ----------------------------------------------------------
    @property
    def basis(self) -> Mat:
        """Canonical basis as matrix columns."""
        if self.dim == 0:
            raise ValueError("zero subspace has no basis matrix")
        return Mat(self._basis_rows).transpose()

    def basis_vectors(self) -> tuple:
        return self._basis_rows

    @property
    def projective_dim(self) -> int:
        return self.dim - 1

    # -- predicates -------------------------------------------------------
    def contains(self, v: Sequence) -> bool:
        vv = [as_rational(x) for x in v]
        if len(vv) != self.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        rows = [list(r) for r in self._basis_rows] + [vv]
        _, rk, _ = _reduce_rows(rows)
        return rk == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        return all(self.contains(v) for v in other._basis_rows)

    def coordinates_of(self, v: Sequence) -> tuple:
        sol = solve(self.basis, v)
        if sol is None or self.basis.matvec(sol) != tuple(as_rational(x) for x in v):
            raise ValueError("vector is not in the subspace")
        return sol

    def normals(self) -> tuple:
        """Canonical basis of the annihilator {c : c . v = 0 for v in self}."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)._basis_rows
        res = rref(self.basis.transpose())
        return res.kernel._basis_rows

    def sort_key(self):
        return tuple((x.numerator, x.denominator) for row in self._basis_rows for x in row)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self._basis_rows == other._basis_rows
        )

    def __hash__(self):
        return hash((self.ambient_dim, self._basis_rows))

    def __repr__(self):
        vecs = ", ".join("(" + ", ".join(rational_str(x) for x in r) + ")" for r in self._basis_rows)
        return f"Subspace(dim {self.dim} of Q^{self.ambient_dim}: {vecs})"


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    """Exact intersection, computed from stacked annihilator constraints."""
    if S1.ambient_dim != S2.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    constraints = list(S1.normals()) + list(S2.normals())
    if not constraints:
        return Subspace.full(S1.ambient_dim)
    return rref(Mat(constraints)).kernel


def span_sum(S1: Subspace, S2: Subspace) -> Subspace:
    if S1.ambient_dim != S2.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    return Subspace.from_spanning(
        list(S1.basis_vectors()) + list(S2.basis_vectors()), S1.ambient_dim
    )


def cross3(u: Sequence, v: Sequence) -> tuple:
    """Cross product of two exact 3-vectors."""
    a = [as_rational(x) for x in u]
    b = [as_rational(x) for x in v]
    if len(a) != 3 or len(b) != 3:
        raise ValueError("cross3 needs length-3 vectors")
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def primitive_point(v: Sequence) -> tuple:
    """Canonical integer representative of a projective point.

    Denominators cleared, content divided out, first nonzero entry
    positive.  Two rational vectors represent the same projective point
    iff their primitive forms are equal.
    """
    vv = [as_rational(x) for x in v]
    if all(x == 0 for x in vv):
        raise ValueError("zero vector is not a projective point")
    den = math.lcm(*(x.denominator for x in vv))
    ints = [int(x * den) for x in vv]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


# ---------------------------------------------------------------------------
# floating mirror


def numeric_rank(M, rel_tol: float = 1e-8) -> int:
    """Singular values above rel_tol times the largest one.

    The zero matrix has rank 0; non-finite entries are rejected.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    if isinstance(M, Mat):
        A = M.to_float_array()
    else:
        A = np.asarray(M)
        if A.dtype == object:
            A = A.astype(complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


# ---------------------------------------------------------------------------
# JSON helpers shared by the serializing modules


def mat_to_json(M: Mat) -> list:
    return [[rational_str(x) for x in row] for row in M._d]


def mat_from_json(rows) -> Mat:
    return Mat(rows)


def vec_to_json(v: Sequence) -> list:
    return [rational_str(as_rational(x)) for x in v]
