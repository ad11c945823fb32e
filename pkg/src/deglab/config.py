"""Projective incidence configurations.

Detects quadrilateral sets (six points in P^2 cut out by four lines, the
6_2 4_3 incidence), Desargues configurations (ten lines and ten points in
P^3 from five planes, 10_3 10_3) and their generalization to P^{m-1}, and
runs the reverse recipe turning a labeled quadrilateral set back into a
symmetric operator tuple whose degeneracy locus is the input.

Exact inputs (Fraction coordinates) are decided exactly; float or complex
inputs use a tolerance on normalized coordinates.  SVG emission draws the
affine chart z = 1 with points at infinity pinned to a boundary circle,
and is byte-deterministic for a fixed input.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactlin import (
    Mat,
    Subspace,
    as_rational,
    cross3,
    intersect,
    primitive_point,
    rational_str,
    span_sum,
    vec_to_json,
)
from .pencil import MatrixTuple

__all__ = [
    "Verdict",
    "PointConfig",
    "IncidenceReport",
    "collinear_triples",
    "is_quadrilateral",
    "normalize_quadrilateral",
    "is_generalized_desargues",
    "quadrilateral_to_matrices",
    "LabelingError",
    "render_svg",
]

QUADRILATERAL_TRIPLE_COUNT = 4
DEFAULT_TOL = 1e-7


class Verdict(Enum):
    QUADRILATERAL = "Quadrilateral"
    DESARGUES = "Desargues"
    GENERALIZED_DESARGUES = "GeneralizedDesargues"
    NONE = "None"


class LabelingError(ValueError):
    """Point labels contradict the collinearity structure."""


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


@dataclass(frozen=True)
class PointConfig:
    """Projective points, either exact (Fraction) or numeric (complex).

    No two stored points are projectively equal; construction rejects
    duplicates.  `labels`, when given, pairs each point with an index
    pair {i, j} naming the two lines through it.
    """

    points: tuple
    labels: tuple | None = None
    exact: bool = True

    @classmethod
    def from_points(cls, points: Sequence[Sequence], labels=None, tol: float = DEFAULT_TOL):
        pts = [tuple(p) for p in points]
        flat = [v for p in pts for v in p]
        exact = _is_exact(flat)
        if exact:
            canon = [tuple(as_rational(v) for v in p) for p in pts]
            seen = set()
            for p in canon:
                key = primitive_point(p)
                if key in seen:
                    raise ValueError(f"duplicate projective point {key}")
                seen.add(key)
            stored = tuple(canon)
        else:
            arrs = [np.asarray([complex(v) for v in p]) for p in pts]
            arrs = [a / np.linalg.norm(a) for a in arrs]
            for i, j in itertools.combinations(range(len(arrs)), 2):
                if abs(abs(np.vdot(arrs[i], arrs[j])) - 1.0) < tol:
                    raise ValueError(f"points {i} and {j} are projectively equal")
            stored = tuple(tuple(complex(z) for z in a) for a in arrs)
        lab = tuple(tuple(l) for l in labels) if labels is not None else None
        if lab is not None and len(lab) != len(stored):
            raise ValueError("one label per point required")
        return cls(points=stored, labels=lab, exact=exact)

    def __len__(self):
        return len(self.points)

    def dim(self) -> int:
        return len(self.points[0])


@dataclass(frozen=True)
class IncidenceReport:
    """Outcome of a configuration test.

    `hyperplanes` are line/plane normals for point configurations in P^2
    and canonical Subspaces for higher-dimensional inputs; `incidence`
    is the members x hyperplanes boolean matrix.  For the Desargues case
    the ten triple-intersection points and their point x line incidences
    are attached.
    """

    verdict: Verdict
    collinear_triples: tuple = ()
    hyperplanes: tuple = ()
    incidence: tuple = ()
    intersection_points: tuple = ()
    point_line_incidence: tuple = ()

    def to_json(self) -> dict:
        def hp_json(h):
            if isinstance(h, Subspace):
                return {"basis": [vec_to_json(v) for v in h.basis_vectors()]}
            if _is_exact(h):
                return vec_to_json(h)
            return [[complex(z).real, complex(z).imag] for z in h]

        def pt_json(p):
            if isinstance(p, Subspace):
                return {"basis": [vec_to_json(v) for v in p.basis_vectors()]}
            if _is_exact(p):
                return vec_to_json(p)
            return [[complex(z).real, complex(z).imag] for z in p]

        return {
            "verdict": self.verdict.value,
            "collinear_triples": [list(t) for t in self.collinear_triples],
            "hyperplanes": [hp_json(h) for h in self.hyperplanes],
            "incidence": [list(row) for row in self.incidence],
            "intersection_points": [pt_json(p) for p in self.intersection_points],
            "point_line_incidence": [list(row) for row in self.point_line_incidence],
        }


# ---------------------------------------------------------------------------
# collinearity in P^2


def _det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def collinear_triples(pc: PointConfig, tol: float = DEFAULT_TOL) -> list:
    """All 3-subsets of the points whose 3 x 3 determinant vanishes."""
    if pc.dim() != 3:
        raise ValueError("collinearity test needs points in P^2")
    out = []
    for tr in itertools.combinations(range(len(pc)), 3):
        rows = [pc.points[i] for i in tr]
        if pc.exact:
            if _det3(rows) == 0:
                out.append(tr)
        else:
            if abs(_det3(rows)) < tol:
                out.append(tr)
    return out


def is_quadrilateral(pc: PointConfig, tol: float = DEFAULT_TOL) -> IncidenceReport:
    """Six points form a quadrilateral set iff exactly four collinear
    triples exist and every point lies on exactly two of them."""
    if len(pc) != 6:
        raise ValueError(f"quadrilateral test needs exactly 6 points, got {len(pc)}")
    triples = collinear_triples(pc, tol)
    counts = [0] * 6
    for tr in triples:
        for i in tr:
            counts[i] += 1
    if len(triples) != QUADRILATERAL_TRIPLE_COUNT or any(c != 2 for c in counts):
        return IncidenceReport(verdict=Verdict.NONE, collinear_triples=tuple(triples))
    lines = []
    for tr in triples:
        p, q = pc.points[tr[0]], pc.points[tr[1]]
        if pc.exact:
            lines.append(primitive_point(cross3(p, q)))
        else:
            v = np.cross(np.asarray(p), np.asarray(q))
            lines.append(tuple(complex(z) for z in v / np.linalg.norm(v)))
    incidence = tuple(
        tuple(i in tr for tr in triples) for i in range(6)
    )
    return IncidenceReport(
        verdict=Verdict.QUADRILATERAL,
        collinear_triples=tuple(triples),
        hyperplanes=tuple(lines),
        incidence=incidence,
    )


# ---------------------------------------------------------------------------
# the single-orbit normalization


def normalize_quadrilateral(lines: Sequence[Sequence]) -> Mat:
    """Projective map sending four generic dual points to the standard frame.

    For lines l_1 ... l_4 (vectors of their coefficients) the returned
    matrix (A D)^{-1}, with A = [l_1 l_2 l_3] and D = diag(A^{-1} l_4),
    moves l_1, l_2, l_3, l_4 to e_1, e_2, e_3, (1, 1, 1) exactly.
    """
    if len(lines) != 4:
        raise ValueError("need exactly four lines")
    ls = [tuple(as_rational(v) for v in l) for l in lines]
    A = Mat.column_stack(ls[:3])
    if A.det() == 0:
        raise ValueError("dual points 1, 2, 3 are collinear")
    w = A.inverse().matvec(ls[3])
    for idx, val in enumerate(w):
        if val == 0:
            triple = sorted(({1, 2, 3} - {idx + 1}) | {4})
            names = ", ".join(str(i) for i in triple)
            raise ValueError(f"dual points {names} are collinear")
    D = Mat.diag(list(w))
    return (A * D).inverse()


# ---------------------------------------------------------------------------
# generalized Desargues detection


def is_generalized_desargues(subspaces: Sequence[Subspace], m: int, tol: float = DEFAULT_TOL) -> IncidenceReport:
    """Certify C(m+1, 2) codimension-2 subspaces as a (generalized)
    Desargues configuration.

    Candidate hyperplanes are spans of subspace pairs of dimension m - 1,
    grouped by canonical form; the verdict requires m + 1 hyperplanes,
    each containing exactly m subspaces, with every subspace on exactly
    two.  Inputs are exact Subspaces, so the decision is exact; `tol` is
    accepted for interface uniformity with the point-based detectors.
    """
    expected = (m + 1) * m // 2
    if len(subspaces) != expected:
        raise ValueError(f"need {expected} subspaces for ambient dimension {m}, got {len(subspaces)}")
    for S in subspaces:
        if S.ambient_dim != m or S.dim != m - 2:
            raise ValueError("members must be codimension-2 subspaces of the ambient space")

    candidates: dict = {}
    for a, b in itertools.combinations(range(len(subspaces)), 2):
        H = span_sum(subspaces[a], subspaces[b])
        if H.dim == m - 1:
            candidates.setdefault(H, set()).update((a, b))

    hyps = []
    for H in candidates:
        members = tuple(i for i, S in enumerate(subspaces) if H.contains_subspace(S))
        if len(members) == m:
            hyps.append((H, members))
    hyps.sort(key=lambda hm: hm[0].sort_key())

    counts = [0] * len(subspaces)
    for _, members in hyps:
        for i in members:
            counts[i] += 1
    ok = len(hyps) == m + 1 and all(c == 2 for c in counts)
    if not ok:
        return IncidenceReport(verdict=Verdict.NONE)

    incidence = tuple(
        tuple(i in members for _, members in hyps) for i in range(len(subspaces))
    )
    verdict = {3: Verdict.QUADRILATERAL, 4: Verdict.DESARGUES}.get(m, Verdict.GENERALIZED_DESARGUES)

    points: tuple = ()
    point_line: tuple = ()
    if m == 4:
        seen: dict = {}
        for a, b in itertools.combinations(range(len(subspaces)), 2):
            P = intersect(subspaces[a], subspaces[b])
            if P.dim == 1:
                seen.setdefault(P, set()).update((a, b))
        pts = sorted(seen.items(), key=lambda kv: kv[0].sort_key())
        points = tuple(P for P, _ in pts)
        point_line = tuple(
            tuple(i in on for i in range(len(subspaces))) for _, on in pts
        )
        if len(points) != 10 or any(sum(row) != 3 for row in point_line):
            return IncidenceReport(verdict=Verdict.NONE)

    return IncidenceReport(
        verdict=verdict,
        hyperplanes=tuple(H for H, _ in hyps),
        incidence=incidence,
        intersection_points=points,
        point_line_incidence=point_line,
    )


# ---------------------------------------------------------------------------
# the recipe: quadrilateral points -> symmetric tuple


def _derive_labels(triples) -> dict:
    """Map point index -> (line i, line j) from the 4-triple cover.

    Lines are numbered 1..4 in lexicographic order of their member
    triples, which is the least witness consistent with the cover.
    """
    lines = sorted(tuple(sorted(t)) for t in triples)
    labels = {}
    for p in range(6):
        on = tuple(k + 1 for k, tr in enumerate(lines) if p in tr)
        labels[p] = on
    return labels


def quadrilateral_to_matrices(pc: PointConfig, tol: float = DEFAULT_TOL) -> MatrixTuple:
    """Symmetric 4-tuple whose degeneracy locus is the given quadrilateral set.

    With points labeled P_ij (line i meets line j), the four line normals
    are v_1 = P_12 x P_13, v_2 = P_12 x P_23, v_3 = P_13 x P_23 and
    v_4 = P_14 x P_34, and the tuple is A_i = v_i v_i^T.  Unlabeled
    input is labeled from the collinearity structure first.
    """
    report = is_quadrilateral(pc, tol)
    if report.verdict is not Verdict.QUADRILATERAL:
        raise ValueError("points do not form a quadrilateral set")
    if pc.labels is not None:
        labels = {i: tuple(sorted(pc.labels[i])) for i in range(6)}
        by_label = {lab: i for i, lab in labels.items()}
        if sorted(by_label) != [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]:
            raise LabelingError("labels must be the six pairs from {1, 2, 3, 4}")
        for line in range(1, 5):
            tr = tuple(sorted(i for i, lab in labels.items() if line in lab))
            if tr not in {tuple(sorted(t)) for t in report.collinear_triples}:
                raise LabelingError(
                    f"points labeled with line {line} are not collinear; labeling "
                    "is inconsistent with the collinearity structure"
                )
    else:
        labels = _derive_labels(report.collinear_triples)
        by_label = {lab: i for i, lab in labels.items()}

    P = {lab: pc.points[i] for lab, i in by_label.items()}
    if pc.exact:
        v1 = cross3(P[(1, 2)], P[(1, 3)])
        v2 = cross3(P[(1, 2)], P[(2, 3)])
        v3 = cross3(P[(1, 3)], P[(2, 3)])
        v4 = cross3(P[(1, 4)], P[(3, 4)])
        vs = [primitive_point(v) for v in (v1, v2, v3, v4)]
    else:
        def xc(a, b):
            v = np.cross(np.asarray(a), np.asarray(b))
            v = v / np.linalg.norm(v)
            return tuple(Fraction(float(z.real)) for z in v)

        vs = [
            xc(P[(1, 2)], P[(1, 3)]),
            xc(P[(1, 2)], P[(2, 3)]),
            xc(P[(1, 3)], P[(2, 3)]),
            xc(P[(1, 4)], P[(3, 4)]),
        ]
    return MatrixTuple.from_matrices([Mat.outer(v, v) for v in vs])


# ---------------------------------------------------------------------------
# SVG emission


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_svg(points, lines=(), labels=None, size: int = 600) -> str:
    """Deterministic SVG of a P^2 configuration on the chart z = 1.

    Finite points are drawn in the plane; points at infinity sit on the
    boundary circle at their direction angle.  `lines` are coefficient
    triples (a, b, c) of a x + b y + c z = 0.
    """
    pts = []
    for p in points:
        v = [float(getattr(x, "real", x)) for x in p]
        pts.append(v)
    finite = [(v[0] / v[2], v[1] / v[2]) for v in pts if abs(v[2]) > 1e-9]
    if finite:
        xs = [p[0] for p in finite]
        ys = [p[1] for p in finite]
        cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
        half = max(max(xs) - min(xs), max(ys) - min(ys), 2.0) / 2 * 1.4
    else:
        cx = cy = 0.0
        half = 2.0
    radius = size * 0.46
    scale = radius / half

    def to_screen(x, y):
        return (size / 2 + (x - cx) * scale, size / 2 - (y - cy) * scale)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<circle cx="{size/2}" cy="{size/2}" r="{_fmt(radius)}" fill="none" '
        'stroke="#cccccc" stroke-dasharray="4 4"/>',
    ]
    for coeffs in lines:
        a, b, c = (float(getattr(x, "real", x)) for x in coeffs)
        # clip a x + b y + c = 0 against the bounding square of the view
        lo_x, hi_x = cx - half, cx + half
        lo_y, hi_y = cy - half, cy + half
        seg = []
        if abs(b) > 1e-12:
            for x in (lo_x, hi_x):
                y = -(a * x + c) / b
                if lo_y - 1e-9 <= y <= hi_y + 1e-9:
                    seg.append((x, y))
        if abs(a) > 1e-12:
            for y in (lo_y, hi_y):
                x = -(b * y + c) / a
                if lo_x - 1e-9 <= x <= hi_x + 1e-9:
                    seg.append((x, y))
        dedup = []
        for s in seg:
            if all(abs(s[0] - t[0]) + abs(s[1] - t[1]) > 1e-9 for t in dedup):
                dedup.append(s)
        if len(dedup) >= 2:
            (x1, y1), (x2, y2) = dedup[0], dedup[1]
            sx1, sy1 = to_screen(x1, y1)
            sx2, sy2 = to_screen(x2, y2)
            out.append(
                f'<line x1="{_fmt(sx1)}" y1="{_fmt(sy1)}" x2="{_fmt(sx2)}" y2="{_fmt(sy2)}" '
                'stroke="#2060c0" stroke-width="1.5"/>'
            )
    import math as _math

    for idx, v in enumerate(pts):
        if abs(v[2]) > 1e-9:
            sx, sy = to_screen(v[0] / v[2], v[1] / v[2])
        else:
            ang = _math.atan2(v[1], v[0])
            sx = size / 2 + radius * _math.cos(ang)
            sy = size / 2 - radius * _math.sin(ang)
        out.append(f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="4" fill="#c03020"/>')
        text = labels[idx] if labels else str(idx + 1)
        out.append(
            f'<text x="{_fmt(sx + 6)}" y="{_fmt(sy - 6)}" font-size="12" '
            f'font-family="monospace" fill="#333333">{text}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
