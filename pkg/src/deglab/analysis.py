"""Phase-retrieval tests and dimension estimates by Jacobian rank.

The measurement map of a symmetric tuple sends x to (x^T A_i x); it is
injective at x exactly when the vectors A_i x span the ambient space, so
the tuple has the phase retrieval property iff its degeneracy locus has
no real point.

Dimensions of the parametrized varieties (symmetroid coefficient maps,
rank-one span families) are estimated numerically-symbolically: the
Jacobian of the polynomial parametrization is formed exactly (adjugate
identity for determinant coefficients, direct differentiation for the
multilinear span maps) and its rank is computed exactly at random
integer points.  Ranks at sample points are generic-rank lower bounds;
the report keeps the per-trial values and their maximum.
"""

from __future__ import annotations

import itertools
import os
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exactlin import Mat, Subspace, numeric_rank, rref
from .locus import (
    DecompositionError,
    LocusResult,
    RankOneFamily,
    SpanCoefficients,
    decompose_symmetric_tuple,
    fiber_system,
    solve_locus_p2,
    span_tuple,
    structured_locus,
)
from .pencil import MatrixTuple, MultiPoly, poly_det

__all__ = [
    "PRMethod",
    "PRVerdict",
    "ParamKind",
    "Parametrization",
    "JacobianReport",
    "injective_at",
    "measurements",
    "phase_retrieval_test",
    "jacobian_rank",
    "symmetroid_coefficient_jacobian",
    "SpanAuditReport",
    "symmetric_span_audit",
    "trial_rng",
    "max_threads",
]

SAMPLE_RANGE = 20  # random integer evaluation points live in [-20, 20]


def max_threads() -> int:
    try:
        return max(1, int(os.environ.get("DEGLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, args):
    n = max_threads()
    if n <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, args))


def trial_rng(seed: int, trial: int, tag: str = "") -> random.Random:
    """Deterministic per-trial generator, independent of scheduling."""
    return random.Random(f"{seed}:{trial}:{tag}")


# ---------------------------------------------------------------------------
# injectivity of the measurement map


def measurements(t: MatrixTuple, x: Sequence):
    """The quadratic measurement vector (x^T A_1 x, ..., x^T A_r x)."""
    xs = list(x)
    out = []
    for A in t.matrices:
        if all(isinstance(v, (int, Fraction)) for v in xs):
            Ax = A.matvec(xs)
            out.append(sum(a * b for a, b in zip(xs, Ax)))
        else:
            arr = np.asarray([complex(v) for v in xs])
            out.append(complex(arr @ A.to_float_array() @ arr))
    return tuple(out)


def injective_at(t: MatrixTuple, x: Sequence, tol: float = 1e-8) -> bool:
    """True iff the vectors A_1 x, ..., A_r x span the ambient space.

    The criterion characterizes injectivity of the measurement map at x
    for symmetric tuples; a warning is issued otherwise.
    """
    xs = list(x)
    if all(complex(v) == 0 for v in xs):
        raise ValueError("injectivity is undefined at the zero vector")
    if not t.symmetric:
        warnings.warn("spanning criterion characterizes injectivity only for symmetric tuples")
    if all(isinstance(v, (int, Fraction)) for v in xs):
        cols = [A.matvec(xs) for A in t.matrices]
        return rref(Mat.column_stack(cols)).rank == t.m
    arr = np.asarray([complex(v) for v in xs]).reshape(-1, 1)
    cols = np.hstack([A.to_float_array() @ arr for A in t.matrices])
    return numeric_rank(cols, rel_tol=tol) == t.m


class PRMethod(Enum):
    EXACT_LOCUS = "ExactLocus"
    NUMERIC_LOCUS = "NumericLocus"
    CODIMENSION_ARGUMENT = "CodimensionArgument"


@dataclass(frozen=True)
class PRVerdict:
    holds: bool
    witnesses: tuple
    method: PRMethod
    locus: LocusResult | None = None

    def to_json(self) -> dict:
        wit = []
        for w in self.witnesses:
            if isinstance(w, Subspace):
                wit.append({"basis": [[str(x) for x in v] for v in w.basis_vectors()]})
            else:
                wit.append([float(getattr(v, "real", v)) for v in w])
        return {"holds": self.holds, "method": self.method.value, "witnesses": wit}


def phase_retrieval_test(t, tol: float = 1e-8) -> PRVerdict:
    """Decide the phase retrieval property via the degeneracy locus.

    A tuple admits phase retrieval iff its locus has no real point.
    Rank-one span families are decided exactly in any dimension (their
    locus components are real subspaces, so the property always fails);
    plain tuples are handled numerically for m = 3.
    """
    if isinstance(t, RankOneFamily):
        loc = structured_locus(t)
        return PRVerdict(
            holds=False,
            witnesses=tuple(c.subspace for c in loc.components),
            method=PRMethod.EXACT_LOCUS,
            locus=loc,
        )
    if isinstance(t, tuple) and len(t) == 2 and isinstance(t[0], RankOneFamily):
        return phase_retrieval_test(t[0], tol)
    if not isinstance(t, MatrixTuple):
        raise TypeError("expected a MatrixTuple or a RankOneFamily")
    if t.m != 3:
        raise ValueError("unsupported: unstructured tuples are only handled for m = 3")
    loc = solve_locus_p2(t, tol)
    real = [c for c in loc.components if c.real]
    witnesses = tuple(tuple(z.real for z in c.point) for c in real)
    return PRVerdict(
        holds=not real,
        witnesses=witnesses,
        method=PRMethod.NUMERIC_LOCUS,
        locus=loc,
    )


# ---------------------------------------------------------------------------
# parametrizations and their Jacobians


class ParamKind(Enum):
    SYMMETROID_COEFFS = "SymmetroidCoeffs"
    RANK_ONE_SPAN = "RankOneSpan"
    RANK_ONE_SPAN_FIXED_KERNELS = "RankOneSpanFixedKernels"


def _n_monomials(m: int, r: int) -> int:
    from math import comb

    return comb(m + r - 1, m)


@dataclass(frozen=True)
class Parametrization:
    kind: ParamKind
    m: int
    r: int
    domain_dim: int
    codomain_dim: int
    kernels: tuple = ()

    @classmethod
    def symmetroid_coeffs(cls, m: int, r: int) -> "Parametrization":
        return cls(
            kind=ParamKind.SYMMETROID_COEFFS,
            m=m,
            r=r,
            domain_dim=r * m * (m + 1) // 2,
            codomain_dim=_n_monomials(m, r),
        )

    @classmethod
    def rank_one_span(cls, m: int) -> "Parametrization":
        # m+1 rank-one matrices at 2m-1 parameters each (first matrix has
        # all span coefficients pinned to 1) plus m(m+1) free coefficients
        return cls(
            kind=ParamKind.RANK_ONE_SPAN,
            m=m,
            r=m + 1,
            domain_dim=(m + 1) * (2 * m - 1) + m * (m + 1),
            codomain_dim=(m + 1) * m * m,
        )

    @classmethod
    def rank_one_span_fixed_kernels(cls, m: int, kernels=None) -> "Parametrization":
        if kernels is None:
            kernels = tuple(
                tuple(int(i == j) for i in range(m)) for j in range(m)
            ) + ((1,) * m,)
        kernels = tuple(tuple(Fraction(v) for v in k) for k in kernels)
        if len(kernels) != m + 1:
            raise ValueError(f"need {m + 1} kernel normals")
        return cls(
            kind=ParamKind.RANK_ONE_SPAN_FIXED_KERNELS,
            m=m,
            r=m + 1,
            domain_dim=2 * m * (m + 1),
            codomain_dim=(m + 1) * m * m,
            kernels=kernels,
        )


@dataclass(frozen=True)
class JacobianReport:
    kind: str
    m: int
    r: int
    domain_dim: int
    codomain_dim: int
    ranks_per_trial: tuple
    rank: int
    projective_dim: int
    seed: int
    resamples: int = 0

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "r": self.r,
            "domain_dim": self.domain_dim,
            "codomain_dim": self.codomain_dim,
            "ranks_per_trial": list(self.ranks_per_trial),
            "rank": self.rank,
            "projective_dim": self.projective_dim,
            "seed": self.seed,
            "resamples": self.resamples,
        }


def _sym_params(m: int):
    return [(p, q) for p in range(m) for q in range(p, m)]


def symmetroid_coefficient_jacobian(mats: Sequence[Mat]) -> Mat:
    """Exact Jacobian of the determinant coefficients at a symmetric tuple.

    The derivative of det along one symmetric matrix entry is the
    matching adjugate entry (doubled off the diagonal) scaled by u_k, a
    degree-m form in u; each column is its coefficient vector over the
    degree-m monomial basis.
    """
    m = mats[0].rows
    r = len(mats)
    pencil_rows = [
        [
            MultiPoly(r, {tuple(int(v == k) for v in range(r)): mats[k][i, j] for k in range(r) if mats[k][i, j] != 0})
            for j in range(m)
        ]
        for i in range(m)
    ]

    def cofactor(p, q):
        sub = [
            [pencil_rows[i][j] for j in range(m) if j != q]
            for i in range(m)
            if i != p
        ]
        d = poly_det(sub)
        return d if (p + q) % 2 == 0 else -d

    cof = {}
    for p in range(m):
        for q in range(m):
            cof[(p, q)] = cofactor(p, q)

    monomials = sorted(
        (e for e in itertools.product(range(m + 1), repeat=r) if sum(e) == m),
        key=lambda e: tuple(-v for v in e),
    )
    columns = []
    for k in range(r):
        for p, q in _sym_params(m):
            base = cof[(p, p)] if p == q else cof[(p, q)] + cof[(q, p)]
            uk = MultiPoly.variable(k, r)
            col_poly = uk * base
            columns.append([col_poly.coefficient(e) for e in monomials])
    return Mat.column_stack(columns)


@lru_cache(maxsize=None)
def _span_jacobian_symbolic(m: int, fixed_kernels):
    """Symbolic Jacobian of the rank-one span parametrization.

    Parameters (in order): the column vectors c_j of each E_j = c_j r_j^T,
    then the row vectors r_j (first coordinate pinned to 1, omitted when
    kernels are fixed), then the span coefficients a_{i j} for i >= 2.
    Output entries are the (m+1) m^2 matrix entries of the tuple.
    """
    fixed = fixed_kernels is not None
    n_c = m * (m + 1)
    n_r = 0 if fixed else (m - 1) * (m + 1)
    n_a = m * (m + 1)
    nv = n_c + n_r + n_a

    def c_var(j, p):
        return MultiPoly.variable(j * m + p, nv)

    def r_entry(j, q):
        if fixed:
            return MultiPoly.const(nv, fixed_kernels[j][q])
        if q == 0:
            return MultiPoly.const(nv, 1)
        return MultiPoly.variable(n_c + j * (m - 1) + (q - 1), nv)

    def a_var(i, j):
        # i ranges over 1..m (the first tuple member has coefficients 1)
        return MultiPoly.variable(n_c + n_r + (i - 1) * (m + 1) + j, nv)

    outputs = []
    for i in range(m + 1):
        for p in range(m):
            for q in range(m):
                acc = MultiPoly.zero(nv)
                for j in range(m + 1):
                    term = c_var(j, p) * r_entry(j, q)
                    if i >= 1:
                        term = term * a_var(i, j)
                    acc = acc + term
                outputs.append(acc)
    jac = [[out.partial(v) for v in range(nv)] for out in outputs]
    return jac, nv


def _span_jacobian_at(m: int, kernels, rng: random.Random) -> Mat:
    jac, nv = _span_jacobian_symbolic(m, kernels)
    point = [Fraction(rng.randint(-SAMPLE_RANGE, SAMPLE_RANGE)) for _ in range(nv)]
    return Mat([[entry.evaluate(point) for entry in row] for row in jac])


def jacobian_rank(p: Parametrization, trials: int = 3, seed: int = 0) -> JacobianReport:
    """Maximum exact Jacobian rank over seeded random integer points.

    A draw whose rank falls below the running maximum is resampled a few
    times; every attempt is recorded in `resamples` rather than hidden.
    """
    if trials < 1:
        raise ValueError("need at least one trial")

    def sample(trial: int):
        rng = trial_rng(seed, trial, p.kind.value)
        if p.kind is ParamKind.SYMMETROID_COEFFS:
            mats = []
            for _ in range(p.r):
                entries = [[0] * p.m for _ in range(p.m)]
                for i in range(p.m):
                    for j in range(i, p.m):
                        entries[i][j] = entries[j][i] = rng.randint(-SAMPLE_RANGE, SAMPLE_RANGE)
                mats.append(Mat(entries))
            J = symmetroid_coefficient_jacobian(mats)
        elif p.kind is ParamKind.RANK_ONE_SPAN:
            J = _span_jacobian_at(p.m, None, rng)
        else:
            J = _span_jacobian_at(p.m, p.kernels, rng)
        return rref(J).rank

    ranks = []
    resamples = 0
    running = 0
    for trial in range(trials):
        rk = sample(trial)
        attempt = 0
        while rk < running and attempt < 3:
            resamples += 1
            attempt += 1
            rk = max(rk, sample(trial * 1000 + attempt + 7))
        ranks.append(rk)
        running = max(running, rk)
    return JacobianReport(
        kind=p.kind.value,
        m=p.m,
        r=p.r,
        domain_dim=p.domain_dim,
        codomain_dim=p.codomain_dim,
        ranks_per_trial=tuple(ranks),
        rank=running,
        projective_dim=running - 1,
        seed=seed,
        resamples=resamples,
    )


# ---------------------------------------------------------------------------
# symmetric span audit


@dataclass(frozen=True)
class SpanAuditReport:
    m: int
    trials: int
    seed: int
    decompositions: int
    all_recovered_symmetric: bool
    real_chamber: int
    complex_chamber: int
    kernel_sets_match_transpose: bool | None = None
    span_dim: int | None = None
    symmetric_tuple_dim: int | None = None

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "trials": self.trials,
            "seed": self.seed,
            "decompositions": self.decompositions,
            "all_recovered_symmetric": self.all_recovered_symmetric,
            "real_chamber": self.real_chamber,
            "complex_chamber": self.complex_chamber,
            "kernel_sets_match_transpose": self.kernel_sets_match_transpose,
            "span_dim": self.span_dim,
            "symmetric_tuple_dim": self.symmetric_tuple_dim,
        }


def _random_symmetric_tuple(m: int, rng: random.Random, lo=-9, hi=9) -> MatrixTuple:
    mats = []
    for _ in range(m + 1):
        e = [[0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                e[i][j] = e[j][i] = rng.randint(lo, hi)
        mats.append(Mat(e))
    return MatrixTuple.from_matrices(mats)


def _random_generic_family(m: int, rng: random.Random) -> RankOneFamily:
    while True:
        vs = [[rng.randint(-5, 5) for _ in range(m)] for _ in range(m + 1)]
        if any(all(v == 0 for v in vec) for vec in vs):
            continue
        try:
            fam = RankOneFamily.from_vectors(vs)
        except ValueError:
            continue
        if fam.generic:
            return fam


def symmetric_span_audit(m: int, trials: int = 20, seed: int = 0) -> SpanAuditReport:
    """Instance checks of the symmetric rank-one span phenomena.

    m = 3: random symmetric 4-tuples are decomposed whenever their six
    locus points are real (the real chamber; a positive fraction of
    symmetric tuples has four of the six points complex, in which case a
    real rank-one decomposition cannot exist and the trial is counted to
    the complex chamber).  Recovered directions are checked symmetric.

    m = 4: random symmetric span families are rebuilt from their locus
    alone; the reconstructed hyperplane set must equal both {ker E_i}
    and {ker E_i^T}, and the dimension comparison between the fixed-
    kernel span variety and the space of symmetric 5-tuples is reported.
    """
    if m not in (3, 4):
        raise ValueError("audit supports m = 3 and m = 4")

    if m == 3:
        decompositions = 0
        real_chamber = 0
        complex_chamber = 0
        all_sym = True
        for trial in range(trials):
            rng = trial_rng(seed, trial, "audit3")
            t = _random_symmetric_tuple(3, rng)
            try:
                fam, coeffs = decompose_symmetric_tuple(t)
            except DecompositionError:
                complex_chamber += 1
                continue
            real_chamber += 1
            decompositions += 1
            all_sym &= fam.symmetric()
        return SpanAuditReport(
            m=3,
            trials=trials,
            seed=seed,
            decompositions=decompositions,
            all_recovered_symmetric=all_sym,
            real_chamber=real_chamber,
            complex_chamber=complex_chamber,
        )

    from .config import is_generalized_desargues, Verdict

    matches = True
    decompositions = 0
    for trial in range(trials):
        rng = trial_rng(seed, trial, "audit4")
        fam = _random_generic_family(4, rng)
        while True:
            c = SpanCoefficients.from_rows(
                [[rng.randint(-5, 5) for _ in range(5)] for _ in range(5)]
            )
            if c.a.det() != 0:
                break
        t = span_tuple(fam, c)
        assert t.symmetric
        loc = structured_locus(fam)
        rep = is_generalized_desargues([comp.subspace for comp in loc.components], 4)
        if rep.verdict is not Verdict.DESARGUES:
            matches = False
            continue
        decompositions += 1
        recovered = set(rep.hyperplanes)
        kernels = set(fam.kernels)
        kernels_t = set(fam.transpose().kernels)
        matches &= recovered == kernels == kernels_t
    fixed = jacobian_rank(Parametrization.rank_one_span_fixed_kernels(4), trials=2, seed=seed)
    sym_dim = 5 * 10  # five symmetric 4 x 4 matrices
    return SpanAuditReport(
        m=4,
        trials=trials,
        seed=seed,
        decompositions=decompositions,
        all_recovered_symmetric=True,
        real_chamber=decompositions,
        complex_chamber=0,
        kernel_sets_match_transpose=matches,
        span_dim=fixed.rank,
        symmetric_tuple_dim=sym_dim,
    )
