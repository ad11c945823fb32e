"""Degeneracy loci of operator tuples.

The locus of (A_1, ..., A_r) on R^m is the set of projective points x
where [A_1 x ... A_r x] drops rank.  Two routes are implemented:

* `structured_locus` - exact, any m, for tuples in the span of m+1
  rank-one matrices: the components are the pairwise intersections of
  the kernel hyperplanes.
* `solve_locus_p2` - numeric, m = 3 only: dehomogenize the 3 x 3 minor
  system on a chart, eliminate one variable with a Sylvester resultant
  (exact coefficients), read roots off the companion matrix, refine with
  Newton plus a Gauss-Newton polish against every minor, then filter,
  deduplicate and classify real points.

`decompose_symmetric_tuple` inverts the span construction for symmetric
4-tuples on R^3, and `fiber_system` builds the 3 x 6 linear system whose
rank controls the fiber dimension of the locus map.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactlin import (
    Mat,
    Subspace,
    as_rational,
    cross3,
    intersect,
    mat_to_json,
    numeric_rank,
    primitive_point,
    rational_str,
    rref,
    solve,
    vec_to_json,
)
from .pencil import LinearMatrix, MatrixTuple, MultiPoly, build_L, maximal_minors

__all__ = [
    "DegenerateFamilyError",
    "SolverError",
    "DecompositionError",
    "RankOneFamily",
    "SpanCoefficients",
    "LocusComponent",
    "LocusResult",
    "span_tuple",
    "structured_locus",
    "solve_locus_p2",
    "membership",
    "decompose_symmetric_tuple",
    "fiber_system",
]


class DegenerateFamilyError(ValueError):
    """A rank-one family fails the genericity requirement."""


class SolverError(RuntimeError):
    """The numeric locus solver could not produce a result."""


class DecompositionError(RuntimeError):
    """A tuple could not be decomposed into a rank-one span."""


# ---------------------------------------------------------------------------
# rank-one families


@dataclass(frozen=True)
class RankOneFamily:
    """m+1 rank-one m x m matrices with cached kernels and images.

    `kernel_normals[j]` spans the row space of E_j, so ker E_j is the
    hyperplane normal to it.  `generic` is True iff every m-subset of the
    normals is linearly independent.
    """

    m: int
    E: tuple
    kernels: tuple
    images: tuple
    kernel_normals: tuple
    generic: bool

    @classmethod
    def from_matrices(cls, mats: Sequence[Mat]) -> "RankOneFamily":
        mats = tuple(mats)
        m = mats[0].rows
        if len(mats) != m + 1:
            raise ValueError(f"need {m + 1} rank-one matrices for ambient dimension {m}")
        kernels, images, normals = [], [], []
        for j, E in enumerate(mats):
            if E.shape != (m, m):
                raise ValueError("family matrices must be square of equal size")
            res = rref(E)
            if res.rank != 1:
                raise ValueError(f"matrix {j + 1} has rank {res.rank}, not 1")
            kernels.append(res.kernel)
            img = next(E.col(c) for c in range(m) if any(x != 0 for x in E.col(c)))
            images.append(primitive_point(img))
            row = next(E.row(i) for i in range(m) if any(x != 0 for x in E.row(i)))
            normals.append(primitive_point(row))
        generic = cls._dependent_subset(normals, m) is None
        return cls(
            m=m,
            E=mats,
            kernels=tuple(kernels),
            images=tuple(images),
            kernel_normals=tuple(normals),
            generic=generic,
        )

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence]) -> "RankOneFamily":
        """Symmetric family E_j = v_j v_j^T."""
        return cls.from_matrices([Mat.outer(v, v) for v in vectors])

    @staticmethod
    def _dependent_subset(normals, m):
        for subset in itertools.combinations(range(len(normals)), m):
            M = Mat([list(normals[i]) for i in subset])
            if M.det() == 0:
                return subset
        return None

    def dependent_normal_subset(self):
        return self._dependent_subset(self.kernel_normals, self.m)

    def symmetric(self) -> bool:
        return all(E.is_symmetric() for E in self.E)

    def transpose(self) -> "RankOneFamily":
        return RankOneFamily.from_matrices([E.transpose() for E in self.E])


@dataclass(frozen=True)
class SpanCoefficients:
    """Coefficient matrix a with A_i = sum_j a[i][j] E_j."""

    a: Mat

    @classmethod
    def identity(cls, n: int) -> "SpanCoefficients":
        return cls(Mat.identity(n))

    @classmethod
    def from_rows(cls, rows) -> "SpanCoefficients":
        return cls(Mat(rows))


def span_tuple(f: RankOneFamily, c: SpanCoefficients) -> MatrixTuple:
    """The tuple A_i = sum_j a[i][j] E_j, exact."""
    a = c.a
    if a.cols != len(f.E):
        raise ValueError("coefficient shape does not match the family")
    mats = []
    for i in range(a.rows):
        A = Mat.zeros(f.m, f.m)
        for j, E in enumerate(f.E):
            if a[i, j] != 0:
                A = A + a[i, j] * E
        mats.append(A)
    return MatrixTuple.from_matrices(mats)


# ---------------------------------------------------------------------------
# locus results


@dataclass(frozen=True)
class LocusComponent:
    """One irreducible piece of a degeneracy locus.

    Exact components carry a Subspace (the projectivization is reported);
    numeric components carry a complex coordinate tuple normalized to
    unit length with the largest coordinate rotated real positive.
    """

    exact: bool
    residual: float
    label: tuple | None = None
    subspace: Subspace | None = None
    point: tuple | None = None
    multiplicity: int = 1
    real: bool = True

    def exact_point(self) -> tuple:
        if not (self.exact and self.subspace is not None and self.subspace.dim == 1):
            raise ValueError("component is not an exact projective point")
        return primitive_point(self.subspace.basis_vectors()[0])

    def to_json(self) -> dict:
        out: dict = {
            "label": list(self.label) if self.label else None,
            "exact": self.exact,
            "residual": self.residual,
            "multiplicity": self.multiplicity,
            "real": self.real,
        }
        if self.exact and self.subspace is not None:
            if self.subspace.dim == 1:
                out["point"] = [str(v) for v in self.exact_point()]
            else:
                out["basis"] = [vec_to_json(v) for v in self.subspace.basis_vectors()]
        elif self.point is not None:
            out["point"] = [[z.real, z.imag] for z in self.point]
        return out


@dataclass(frozen=True)
class LocusResult:
    components: tuple
    degree: int
    all_real: bool

    def exact_point_set(self) -> set:
        return {c.exact_point() for c in self.components}

    def real_points(self) -> list:
        """Float coordinates of the real numeric components."""
        return [tuple(z.real for z in c.point) for c in self.components if not c.exact and c.real]

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "all_real": self.all_real,
            "components": [c.to_json() for c in self.components],
        }


# ---------------------------------------------------------------------------
# exact structured path


def structured_locus(f: RankOneFamily) -> LocusResult:
    """Pairwise kernel intersections of a generic rank-one family.

    One exact component per pair {i, j}, of projective dimension m - 3
    (a point when m = 3); C(m+1, 2) components in total, all real.
    """
    if not f.generic:
        bad = f.dependent_normal_subset()
        names = ", ".join(str(i + 1) for i in bad)
        raise DegenerateFamilyError(
            f"kernel normals of E_{{{names}}} are linearly dependent; the family is degenerate"
        )
    comps = []
    for i, j in itertools.combinations(range(len(f.E)), 2):
        comps.append(
            LocusComponent(
                exact=True,
                residual=0.0,
                label=(i + 1, j + 1),
                subspace=intersect(f.kernels[i], f.kernels[j]),
            )
        )
    return LocusResult(components=tuple(comps), degree=len(comps), all_real=True)


# ---------------------------------------------------------------------------
# membership


def membership(t: MatrixTuple, x: Sequence, tol: float = 1e-8) -> bool:
    """True iff [A_1 x ... A_r x] has rank below m at the point x."""
    xs = list(x)
    if all(abs(complex(v)) == 0 for v in xs):
        raise ValueError("zero vector is not a projective point")
    exact = all(isinstance(v, (int, Fraction)) for v in xs)
    if exact:
        cols = [A.matvec(xs) for A in t.matrices]
        return rref(Mat.column_stack(cols)).rank < t.m
    arr = np.array([[complex(v) for v in xs]]).T
    cols = np.hstack([A.to_float_array() @ arr for A in t.matrices])
    return numeric_rank(cols, rel_tol=tol) < t.m


# ---------------------------------------------------------------------------
# numeric solver on P^2

_CHARTS = (2, 1, 0)  # z = 1 first, then y = 1, then x = 1


def _poly_to_biv(p: MultiPoly, chart: int):
    """Coefficients {(i, j): Fraction} of p with the chart variable set to 1."""
    keep = [v for v in range(3) if v != chart]
    out: dict = {}
    for e, c in p.terms.items():
        key = (e[keep[0]], e[keep[1]])
        out[key] = out.get(key, Fraction(0)) + c
    return {k: v for k, v in out.items() if v != 0}


def _biv_y_coeffs(biv):
    """List of univariate-in-a coefficient lists, indexed by the b-degree."""
    if not biv:
        return []
    deg_b = max(j for _, j in biv)
    deg_a = max(i for i, _ in biv)
    out = [[Fraction(0)] * (deg_a + 1) for _ in range(deg_b + 1)]
    for (i, j), c in biv.items():
        out[j][i] = c
    return [_uni_trim(u) for u in out]


def _uni_trim(u):
    while u and u[-1] == 0:
        u = u[:-1]
    return u


def _uni_add(u, v):
    n = max(len(u), len(v))
    return _uni_trim([ (u[i] if i < len(u) else 0) + (v[i] if i < len(v) else 0) for i in range(n)])


def _uni_mul(u, v):
    if not u or not v:
        return []
    out = [Fraction(0)] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        if a == 0:
            continue
        for j, b in enumerate(v):
            out[i + j] += a * b
    return _uni_trim(out)


def _uni_neg(u):
    return [-a for a in u]


def _sylvester_resultant(fy, gy):
    """Resultant in the eliminated variable of two polys given as lists of
    univariate coefficient polynomials (index = eliminated-variable degree)."""
    n, m = len(fy) - 1, len(gy) - 1
    if n < 1 or m < 1:
        # one input is free of the eliminated variable: the resultant
        # degenerates to a power of that polynomial
        base = fy[0] if n < 1 else gy[0]
        power = m if n < 1 else n
        out = [Fraction(1)]
        for _ in range(max(power, 1)):
            out = _uni_mul(out, base)
        return out if power > 0 else base
    size = n + m
    rows = []
    for k in range(m):
        row = [[] for _ in range(size)]
        for i, c in enumerate(reversed(fy)):
            row[k + i] = c
        rows.append(row)
    for k in range(n):
        row = [[] for _ in range(size)]
        for i, c in enumerate(reversed(gy)):
            row[k + i] = c
        rows.append(row)

    cache: dict = {}

    def minor(r, cols):
        if r == size:
            return [Fraction(1)]
        hit = cache.get(cols)
        if hit is not None:
            return hit
        acc: list = []
        for pos, c in enumerate(cols):
            entry = rows[r][c]
            if not entry:
                continue
            term = _uni_mul(entry, minor(r + 1, cols[:pos] + cols[pos + 1 :]))
            acc = _uni_add(acc, term if pos % 2 == 0 else _uni_neg(term))
        cache[cols] = acc
        return acc

    return minor(0, tuple(range(size)))


def _uni_roots(coeffs) -> np.ndarray:
    """Complex roots via the companion matrix, with scale-aware trimming."""
    fl = np.array([complex(c) if isinstance(c, complex) else float(c) for c in coeffs],
                  dtype=complex)
    if fl.size == 0:
        return np.array([])
    scale = np.max(np.abs(fl))
    if scale == 0:
        return np.array([])
    fl = fl / scale
    # drop vanishing leading terms (roots at infinity)
    while fl.size and abs(fl[-1]) < 1e-13:
        fl = fl[:-1]
    if fl.size <= 1:
        return np.array([])
    return np.roots(fl[::-1])


class _FloatPoly2:
    """Dense float view of a bivariate polynomial for fast Newton steps."""

    def __init__(self, biv):
        deg_a = max((i for i, _ in biv), default=0)
        deg_b = max((j for _, j in biv), default=0)
        self.c = np.zeros((deg_a + 1, deg_b + 1), dtype=complex)
        for (i, j), q in biv.items():
            self.c[i, j] = float(q)

    def __call__(self, a, b):
        pa = np.array([a**i for i in range(self.c.shape[0])])
        pb = np.array([b**j for j in range(self.c.shape[1])])
        return pa @ self.c @ pb

    def grad(self, a, b):
        da = sum(
            i * self.c[i, j] * a ** (i - 1) * b**j
            for i in range(1, self.c.shape[0])
            for j in range(self.c.shape[1])
        )
        db = sum(
            j * self.c[i, j] * a**i * b ** (j - 1)
            for i in range(self.c.shape[0])
            for j in range(1, self.c.shape[1])
        )
        return da, db


def _newton_pair(F: _FloatPoly2, G: _FloatPoly2, a, b, iters=60):
    for _ in range(iters):
        fv, gv = F(a, b), G(a, b)
        fa, fb = F.grad(a, b)
        ga, gb = G.grad(a, b)
        det = fa * gb - fb * ga
        if abs(det) < 1e-300:
            break
        da = (fv * gb - gv * fb) / det
        db = (gv * fa - fv * ga) / det
        a, b = a - da, b - db
        if abs(da) + abs(db) < 1e-15 * (1 + abs(a) + abs(b)):
            break
    return a, b


def _gauss_newton_all(polys, a, b, iters=4):
    """Least-squares polish of (a, b) against every minor simultaneously."""
    for _ in range(iters):
        r = np.array([P(a, b) for P in polys])
        J = np.array([P.grad(a, b) for P in polys])
        step, *_ = np.linalg.lstsq(J, r, rcond=None)
        a, b = a - step[0], b - step[1]
        if np.max(np.abs(r)) < 1e-15:
            break
    return a, b


def _proj_same(p, q, tol=1e-6) -> bool:
    inner = abs(np.vdot(p, q))
    return math.acos(min(1.0, inner)) < tol


def _phase_normalize(p: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(p)))
    ph = p[k] / abs(p[k])
    return p / ph


_COMBO_ATTEMPTS = 4


def _minor_pairs(minors, attempt: int):
    """Candidate pair of cubics to feed the resultant.

    Attempt 0 uses the two smallest-label minors; later attempts take
    deterministic random integer combinations of every minor, which
    handles tuples whose individual minors share a curve.
    """
    if attempt == 0:
        return minors[0], minors[1]
    rng = random.Random(f"locus-combo:{attempt}")
    nv = minors[0].num_vars

    def combo():
        acc = MultiPoly.zero(nv)
        for p in minors:
            acc = acc + rng.randint(1, 50) * p
        return acc

    return combo(), combo()


def solve_locus_p2(t: MatrixTuple, tol: float = 1e-8) -> LocusResult:
    """All isolated locus points of a tuple of operators on R^3.

    Every chart is solved (a point at infinity on one chart is finite on
    another) and the per-chart results are merged projectively, keeping
    the larger multiplicity for points seen on several charts.  Failure
    on all charts raises SolverError rather than returning silently.
    """
    if t.m != 3:
        raise ValueError("the numeric solver handles m = 3 only")
    if t.r < 4:
        raise ValueError("need at least 4 operators (fewer gives a positive-dimensional locus)")
    minors = maximal_minors(build_L(t))
    filters = []
    for p in minors:
        # an identically-zero minor (three dependent rank-one directions)
        # imposes no condition and cannot filter anything
        scale = max((abs(float(c)) for c in p.terms.values()), default=0.0)
        filters.append((p, 1.0 / scale if scale > 0 else 1.0))

    merged: list = []  # [np point, multiplicity, residual]
    solved_any = False
    for chart in _CHARTS:
        found = _solve_chart(minors, filters, chart, tol)
        if found is None:
            continue
        solved_any = True
        for p, mult, resid in found:
            for entry in merged:
                if _proj_same(entry[0], p):
                    entry[1] = max(entry[1], mult)
                    if resid < entry[2]:
                        entry[0], entry[2] = p, resid
                    break
            else:
                merged.append([p, mult, resid])
    if not solved_any:
        raise SolverError(
            "resultant vanished identically on every chart and combination attempt"
        )

    comps = []
    for p, mult, resid in merged:
        q = _phase_normalize(p)
        real = bool(np.max(np.abs(q.imag)) < 1e-7)
        comps.append(
            LocusComponent(
                exact=False,
                residual=resid,
                point=tuple(complex(z) for z in q),
                multiplicity=mult,
                real=real,
            )
        )
    comps.sort(key=lambda c: tuple((round(z.real, 9), round(z.imag, 9)) for z in c.point))
    degree = sum(c.multiplicity for c in comps)
    return LocusResult(components=tuple(comps), degree=degree, all_real=all(c.real for c in comps))


def _solve_chart(minors, filters, chart: int, tol: float):
    """Solve the minor system on one affine chart; None if degenerate."""
    for attempt in range(_COMBO_ATTEMPTS):
        f, g = _minor_pairs(minors, attempt)
        fb, gb = _poly_to_biv(f, chart), _poly_to_biv(g, chart)
        if not fb or not gb:
            continue
        res = _sylvester_resultant(_biv_y_coeffs(fb), _biv_y_coeffs(gb))
        if not res:
            continue  # identically zero: the pair shares a component here
        roots = _uni_roots(res)
        F, G = _FloatPoly2(fb), _FloatPoly2(gb)
        all_float = [_FloatPoly2(_poly_to_biv(p, chart)) for p, _ in filters]
        keep = [v for v in range(3) if v != chart]

        # cluster resultant roots so a double root seeds multiplicity 2
        root_groups: list = []
        for r in roots:
            for grp in root_groups:
                if abs(grp[0] - r) < 1e-6 * (1 + abs(r)):
                    grp.append(r)
                    break
            else:
                root_groups.append([r])

        fy = _biv_y_coeffs(fb)
        gy = _biv_y_coeffs(gb)
        points: list = []  # [np unit point, multiplicity, residual]
        degenerate_fiber = False
        for grp in root_groups:
            a0 = grp[0]
            # f(a0, b) as a univariate polynomial in b
            yco = [complex(sum(float(c) * a0**i for i, c in enumerate(cu))) for cu in fy]
            if max((abs(c) for c in yco), default=0.0) < 1e-10:
                # f vanishes on the whole vertical line; try g instead
                yco = [complex(sum(float(c) * a0**i for i, c in enumerate(cu))) for cu in gy]
                if max((abs(c) for c in yco), default=0.0) < 1e-10:
                    # the pair shares this fiber entirely; it cannot
                    # isolate points there, so try another combination
                    degenerate_fiber = True
                    break
            survivors: list = []  # [point, residual] distinct over this root group
            for b0 in _uni_roots(yco):
                a1, b1 = _newton_pair(F, G, a0, b0)
                a1, b1 = _gauss_newton_all(all_float, a1, b1)
                hom = np.zeros(3, dtype=complex)
                hom[chart] = 1.0
                hom[keep[0]], hom[keep[1]] = a1, b1
                hom = hom / np.linalg.norm(hom)
                resid = max(abs(pf.evaluate(list(hom))) * sc for pf, sc in filters)
                if resid >= tol:
                    continue
                for entry in survivors:
                    if _proj_same(entry[0], hom):
                        entry[1] = min(entry[1], resid)
                        break
                else:
                    survivors.append([hom, resid])
            if not survivors:
                continue
            # a k-fold resultant root over a single point means multiplicity k;
            # several distinct points over one root share the count
            mult = max(1, len(grp) - (len(survivors) - 1))
            for hom, resid in survivors:
                for entry in points:
                    if _proj_same(entry[0], hom):
                        entry[1] = max(entry[1], mult)
                        entry[2] = min(entry[2], resid)
                        break
                else:
                    points.append([hom, mult, resid])
        if degenerate_fiber:
            continue
        return points
    return None


# ---------------------------------------------------------------------------
# symmetric decomposition (m = 3, r = 4)

_RECON_DENOM_BOUND = 10**6
_EXACT_RESID = 1e-10


def _reconstruct_rational_point(p, bound=_RECON_DENOM_BOUND):
    """Small-rational reconstruction of a (near-)real projective point."""
    arr = np.array(p)
    if np.max(np.abs(arr.imag)) > 1e-7:
        return None
    re = arr.real
    k = int(np.argmax(np.abs(re)))
    re = re / re[k]
    out = []
    for v in re:
        q = Fraction(float(v)).limit_denominator(bound)
        if abs(float(q) - v) > 1e-6:
            return None
        out.append(q)
    return primitive_point(out)


def decompose_symmetric_tuple(t: MatrixTuple, tol: float = 1e-8):
    """Rank-one span decomposition of a symmetric 4-tuple on R^3.

    Finds the six locus points, groups them into four lines, takes the
    line normals v_i as the rank-one directions E_i = v_i v_i^T and
    solves the 16 coefficients a[i][j] with A_i = sum_j a[i][j] E_j.
    Exact whenever the six points reconstruct as small rationals that
    verify exactly; otherwise the float solution is returned with its
    residual.
    """
    if t.m != 3 or t.r != 4:
        raise ValueError("decomposition needs four operators on R^3")
    if not t.symmetric:
        raise ValueError("decomposition is defined for symmetric tuples")
    loc = solve_locus_p2(t, tol)
    pts = [c for c in loc.components]
    if len(pts) != 6 or any(c.multiplicity != 1 for c in pts):
        raise DecompositionError(
            f"locus is not 6 distinct points (found {len(pts)} components of degree {loc.degree})"
        )

    exact_pts = None
    if all(c.residual < _EXACT_RESID for c in pts):
        cand = [_reconstruct_rational_point(c.point) for c in pts]
        if all(p is not None for p in cand) and all(
            membership(t, list(p)) for p in cand
        ):
            exact_pts = cand

    if exact_pts is not None:
        vs = _lines_from_points_exact(exact_pts)
        E = [Mat.outer(v, v) for v in vs]
        a_rows, resid = _solve_span_coefficients(t, E)
        if a_rows is None:
            raise DecompositionError("exact coefficient solve was inconsistent")
        fam = RankOneFamily.from_matrices(E)
        return fam, SpanCoefficients.from_rows(a_rows)

    # float fallback: same construction with binary-exact float rationals
    if not all(c.real for c in pts):
        n_real = sum(1 for c in pts if c.real)
        raise DecompositionError(
            f"only {n_real} of the 6 locus points are real; a real rank-one "
            "span decomposition does not exist for this tuple"
        )
    float_pts = [np.array(c.point).real for c in pts]
    lines = _lines_from_points_float(float_pts, tol)
    E = [Mat.outer(v, v) for v in lines]
    a_rows, resid = _solve_span_coefficients(t, E, least_squares=True)
    if resid > max(tol, 1e-6):
        raise DecompositionError(f"span coefficients inconsistent (residual {resid:.3e})")
    fam = RankOneFamily.from_matrices(E)
    return fam, SpanCoefficients.from_rows(a_rows)


def _lines_from_points_exact(points):
    triples = [
        tr
        for tr in itertools.combinations(range(6), 3)
        if Mat([list(points[i]) for i in tr]).det() == 0
    ]
    if len(triples) != 4:
        raise DecompositionError(f"expected 4 collinear triples, found {len(triples)}")
    return [
        primitive_point(cross3(points[tr[0]], points[tr[1]])) for tr in triples
    ]


def _lines_from_points_float(points, tol):
    normed = [p / np.linalg.norm(p) for p in points]
    triples = [
        tr
        for tr in itertools.combinations(range(6), 3)
        if abs(np.linalg.det(np.array([normed[i] for i in tr]))) < max(tol, 1e-7)
    ]
    if len(triples) != 4:
        raise DecompositionError(f"expected 4 collinear triples, found {len(triples)}")
    out = []
    for tr in triples:
        v = np.cross(normed[tr[0]], normed[tr[1]])
        v = v / np.linalg.norm(v)
        out.append(tuple(Fraction(float(x)) for x in v))
    return out


def _solve_span_coefficients(t: MatrixTuple, E, least_squares: bool = False):
    """Solve A_i = sum_j a[i][j] E_j for the coefficient matrix a."""
    m = t.m
    cols = [[Ej[p, q] for p in range(m) for q in range(m)] for Ej in E]
    M = Mat.column_stack(cols)
    rows = []
    worst = 0.0
    for A in t.matrices:
        b = [A[p, q] for p in range(m) for q in range(m)]
        if least_squares:
            sol, res, *_ = np.linalg.lstsq(M.to_float_array(), np.array([float(x) for x in b]), rcond=None)
            fit = M.to_float_array() @ sol
            worst = max(worst, float(np.max(np.abs(fit - np.array([float(x) for x in b])))))
            rows.append([Fraction(float(s)) for s in sol])
        else:
            sol = solve(M, b)
            if sol is None or M.matvec(sol) != tuple(as_rational(x) for x in b):
                return None, math.inf
            rows.append(list(sol))
    return rows, worst


# ---------------------------------------------------------------------------
# fiber system


def fiber_system(A1: Mat, A2: Mat):
    """Linear conditions tying a third operator's column mixers to A1, A2.

    For each column pair (j, k) the wedge of the column differences must
    vanish; substituting A3(j) = alpha_{1j} A1(j) + alpha_{2j} A2(j)
    makes that linear in the six unknowns (a11, a21, a12, a22, a13, a23).
    Returns the exact 3 x 6 coefficient matrix and its rank.
    """
    if A1.shape != (3, 3) or A2.shape != (3, 3):
        raise ValueError("fiber_system expects two 3 x 3 matrices")
    rows = []
    for j, k in ((0, 1), (0, 2), (1, 2)):
        d1 = [a - b for a, b in zip(A1.col(j), A1.col(k))]
        d2 = [a - b for a, b in zip(A2.col(j), A2.col(k))]
        w = cross3(d1, d2)

        def dot(v):
            return sum(a * b for a, b in zip(w, v))

        row = [Fraction(0)] * 6
        row[2 * j] = dot(A1.col(j))
        row[2 * j + 1] = dot(A2.col(j))
        row[2 * k] = -dot(A1.col(k))
        row[2 * k + 1] = -dot(A2.col(k))
        rows.append(row)
    Q = Mat(rows)
    return Q, rref(Q).rank
