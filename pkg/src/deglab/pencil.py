"""Sparse multivariate polynomials over Q and matrices of linear forms.

Three players:

* `MultiPoly` - exponent-vector -> Fraction map, exact arithmetic.
* `LinearMatrix` - an m x r matrix whose (i, j) entry is a linear form in
  n variables, stored as an m x r x n coefficient tensor.  It houses both
  the evaluation matrix L(x) = [A_1 x ... A_r x] of a tuple and, after
  swapping the column and variable axes, the pencil U(u) with
  L(x) u = U(u) x as a polynomial identity.
* `MatrixTuple` - an ordered tuple of m x m operators.

Determinants of polynomial matrices are expanded by minors with
memoisation on column subsets; sizes here stay at or below 5 x 5.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactlin import Mat, as_rational, mat_from_json, mat_to_json, rational_str

__all__ = [
    "MultiPoly",
    "poly_det",
    "LinearMatrix",
    "MatrixTuple",
    "build_L",
    "maximal_minors",
    "hilbert_burch_swap",
    "pencil_matrix",
    "det_pencil",
]


def _grlex_key(exps):
    # grade first, then lexicographic with earlier variables weighing more
    return (-sum(exps), tuple(-e for e in exps))


class MultiPoly:
    """Polynomial in num_vars variables with Fraction coefficients.

    Zero coefficients are never stored.  Instances are immutable and
    hashable; printing uses graded lexicographic term order so equal
    polynomials print identically.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms=None):
        clean = {}
        for exps, c in (terms or {}).items():
            c = as_rational(c)
            if c == 0:
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise ValueError("exponent vector has wrong length")
            clean[exps] = c
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, num_vars: int) -> "MultiPoly":
        return cls(num_vars, {})

    @classmethod
    def const(cls, num_vars: int, c) -> "MultiPoly":
        return cls(num_vars, {(0,) * num_vars: as_rational(c)})

    @classmethod
    def variable(cls, i: int, num_vars: int) -> "MultiPoly":
        exps = tuple(int(k == i) for k in range(num_vars))
        return cls(num_vars, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff, num_vars=None) -> "MultiPoly":
        exps = tuple(exps)
        return cls(num_vars if num_vars is not None else len(exps), {exps: coeff})

    # -- ring operations --------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.num_vars != self.num_vars:
                raise ValueError("variable count mismatch")
            return other
        return MultiPoly.const(self.num_vars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MultiPoly(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.const(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus and evaluation ------------------------------------------
    def partial(self, i: int) -> "MultiPoly":
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ne = list(e)
            ne[i] -= 1
            out[tuple(ne)] = c * e[i]
        return MultiPoly(self.num_vars, out)

    def evaluate(self, values: Sequence):
        """Evaluate at a point whose entries may be Fractions, floats,
        complex numbers, or even MultiPolys (polynomial composition)."""
        if len(values) != self.num_vars:
            raise ValueError("wrong number of values")
        if any(isinstance(v, MultiPoly) for v in values):
            nv = next(v.num_vars for v in values if isinstance(v, MultiPoly))
            vals = [v if isinstance(v, MultiPoly) else MultiPoly.const(nv, v) for v in values]
            acc = MultiPoly.zero(nv)
            for e, c in self.terms.items():
                term = MultiPoly.const(nv, c)
                for v, k in zip(vals, e):
                    if k:
                        term = term * v**k
                acc = acc + term
            return acc
        exact = all(isinstance(v, (Fraction, int)) for v in values)
        total = Fraction(0) if exact else 0.0
        for e, c in self.terms.items():
            term = c if exact else float(c)
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def fix_var(self, i: int, value) -> "MultiPoly":
        """Substitute an exact value for variable i (keeps num_vars)."""
        value = as_rational(value)
        out: dict = {}
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            key = tuple(ne)
            out[key] = out.get(key, Fraction(0)) + c * value**k
        return MultiPoly(self.num_vars, out)

    # -- structure ----------------------------------------------------------
    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: _grlex_key(item[0]))

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            if isinstance(other, (int, Fraction)):
                return self == MultiPoly.const(self.num_vars, other)
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    # -- printing / serialization --------------------------------------------
    def pretty(self, names: Sequence[str] | None = None) -> str:
        if self.is_zero():
            return "0"
        names = names or [f"x{i+1}" for i in range(self.num_vars)]
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mono = "*".join(factors)
            if not mono:
                text = rational_str(c)
            elif c == 1:
                text = mono
            elif c == -1:
                text = f"-{mono}"
            else:
                text = f"{rational_str(c)}*{mono}"
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"MultiPoly({self.pretty()})"

    def to_json(self, names: Sequence[str] | None = None) -> dict:
        names = names or [f"x{i+1}" for i in range(self.num_vars)]
        return {
            "vars": list(names),
            "terms": [
                {"exps": list(e), "coeff": rational_str(c)} for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MultiPoly":
        nv = len(obj["vars"])
        return cls(nv, {tuple(t["exps"]): as_rational(t["coeff"]) for t in obj["terms"]})


def poly_det(entries: Sequence[Sequence[MultiPoly]]) -> MultiPoly:
    """Determinant of a square matrix of polynomials.

    Expansion by minors along rows, memoised on the set of remaining
    columns, so the cost is O(2^n) polynomial products instead of n!.
    """
    n = len(entries)
    if any(len(r) != n for r in entries):
        raise ValueError("poly_det needs a square matrix")
    nv = entries[0][0].num_vars
    cache: dict = {}

    def minor(row: int, cols: tuple) -> MultiPoly:
        if row == n:
            return MultiPoly.const(nv, 1)
        key = cols
        hit = cache.get(key)
        if hit is not None:
            return hit
        acc = MultiPoly.zero(nv)
        for pos, c in enumerate(cols):
            entry = entries[row][c]
            if entry.is_zero():
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1 :])
            term = entry * sub
            acc = acc + (term if pos % 2 == 0 else -term)
        cache[key] = acc
        return acc

    return minor(0, tuple(range(n)))


# ---------------------------------------------------------------------------
# matrices of linear forms


class LinearMatrix:
    """rows x cols matrix of linear forms in num_vars variables.

    tensor[i][j][k] is the coefficient of variable k in entry (i, j).
    """

    __slots__ = ("rows", "cols", "num_vars", "tensor")

    def __init__(self, tensor):
        t = tuple(tuple(tuple(as_rational(x) for x in cell) for cell in row) for row in tensor)
        rows = len(t)
        cols = len(t[0])
        nv = len(t[0][0])
        if any(len(r) != cols for r in t) or any(len(c) != nv for r in t for c in r):
            raise ValueError("ragged tensor")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "num_vars", nv)
        object.__setattr__(self, "tensor", t)

    def __setattr__(self, name, value):
        raise AttributeError("LinearMatrix is immutable")

    def entry(self, i: int, j: int) -> MultiPoly:
        return MultiPoly(
            self.num_vars,
            {
                tuple(int(k == v) for k in range(self.num_vars)): c
                for v, c in enumerate(self.tensor[i][j])
                if c != 0
            },
        )

    def poly_rows(self) -> list:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def evaluate(self, x: Sequence) -> Mat:
        xs = [as_rational(v) for v in x]
        if len(xs) != self.num_vars:
            raise ValueError("evaluation point has wrong length")
        return Mat(
            [
                [sum(c * v for c, v in zip(cell, xs)) for cell in row]
                for row in self.tensor
            ]
        )

    def evaluate_float(self, x: Sequence) -> np.ndarray:
        xs = np.asarray(x)
        t = np.array(
            [[[float(c) for c in cell] for cell in row] for row in self.tensor]
        )
        return t @ xs

    def swap_axes(self) -> "LinearMatrix":
        """Exchange the column and variable axes (see hilbert_burch_swap)."""
        return LinearMatrix(
            [
                [
                    [self.tensor[i][j][k] for j in range(self.cols)]
                    for k in range(self.num_vars)
                ]
                for i in range(self.rows)
            ]
        )

    def __eq__(self, other):
        return isinstance(other, LinearMatrix) and self.tensor == other.tensor

    def __hash__(self):
        return hash(self.tensor)

    def pretty(self, names: Sequence[str] | None = None) -> str:
        rows = []
        for i in range(self.rows):
            rows.append("[" + ", ".join(self.entry(i, j).pretty(names) for j in range(self.cols)) + "]")
        return "[" + "; ".join(rows) + "]"

    def __repr__(self):
        return f"LinearMatrix({self.pretty()})"

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "num_vars": self.num_vars,
            "tensor": [
                [[rational_str(c) for c in cell] for cell in row] for row in self.tensor
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearMatrix":
        return cls(obj["tensor"])


@dataclass(frozen=True)
class MatrixTuple:
    """Ordered tuple (A_1, ..., A_r) of m x m operators with exact entries."""

    m: int
    r: int
    matrices: tuple

    @classmethod
    def from_matrices(cls, mats: Sequence[Mat]) -> "MatrixTuple":
        mats = tuple(mats)
        if not mats:
            raise ValueError("empty tuple")
        m = mats[0].rows
        for A in mats:
            if A.shape != (m, m):
                raise ValueError("all operators must be square of equal size")
        return cls(m=m, r=len(mats), matrices=mats)

    @classmethod
    def from_arrays(cls, arrays: Sequence[Sequence[Sequence]]) -> "MatrixTuple":
        return cls.from_matrices([Mat(a) for a in arrays])

    @property
    def symmetric(self) -> bool:
        return all(A.is_symmetric() for A in self.matrices)

    def transpose(self) -> "MatrixTuple":
        return MatrixTuple.from_matrices([A.transpose() for A in self.matrices])

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "matrices": [mat_to_json(A) for A in self.matrices],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MatrixTuple":
        return cls.from_matrices([mat_from_json(a) for a in obj["matrices"]])


# ---------------------------------------------------------------------------
# the four pencil operations


def build_L(t: MatrixTuple) -> LinearMatrix:
    """Matrix of linear forms whose column j evaluates to A_j x."""
    return LinearMatrix(
        [
            [[t.matrices[j][i, k] for k in range(t.m)] for j in range(t.r)]
            for i in range(t.m)
        ]
    )


def maximal_minors(L: LinearMatrix) -> list:
    """All rows x rows minors, one per column subset in lexicographic order."""
    if L.rows > L.cols:
        raise ValueError("maximal minors need rows <= cols")
    polys = L.poly_rows()
    out = []
    for subset in itertools.combinations(range(L.cols), L.rows):
        out.append(poly_det([[polys[i][j] for j in subset] for i in range(L.rows)]))
    return out


def hilbert_burch_swap(L: LinearMatrix) -> LinearMatrix:
    """The matrix U with L(x) u = U(u) x as an exact polynomial identity.

    U has shape rows x num_vars in `cols` variables; applying the swap
    twice returns the original tensor.
    """
    return L.swap_axes()


def pencil_matrix(t: MatrixTuple) -> LinearMatrix:
    """The pencil u_1 A_1 + ... + u_r A_r as an m x m linear matrix in u."""
    return LinearMatrix(
        [
            [[t.matrices[k][i, j] for k in range(t.r)] for j in range(t.m)]
            for i in range(t.m)
        ]
    )


def det_pencil(t: MatrixTuple) -> MultiPoly:
    """Exact determinant of the pencil: a degree-m form in u_1 ... u_r."""
    return poly_det(pencil_matrix(t).poly_rows())
