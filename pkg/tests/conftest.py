import random

import pytest
from hypothesis import settings

from deglab.exactlin import Mat
from deglab.locus import RankOneFamily, SpanCoefficients, span_tuple
from deglab.pencil import MatrixTuple

settings.register_profile("suite", max_examples=25, deadline=None)
settings.load_profile("suite")

STD_POINTS = {(1, -1, 0), (1, 0, -1), (0, 1, -1), (1, 0, 0), (0, 1, 0), (0, 0, 1)}


@pytest.fixture
def std_points():
    return set(STD_POINTS)


@pytest.fixture
def std_family():
    """Rank-one directions along the coordinate axes and the all-ones vector."""
    return RankOneFamily.from_vectors([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])


@pytest.fixture
def std_tuple(std_family):
    return span_tuple(std_family, SpanCoefficients.identity(4))


@pytest.fixture
def cayley_tuple():
    return MatrixTuple.from_arrays([
        [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 0, 1]],
        [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
    ])


@pytest.fixture
def desargues_family():
    return RankOneFamily.from_vectors(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1]]
    )


def random_symmetric_tuple(seed, m=3, r=4, lo=-9, hi=9) -> MatrixTuple:
    rng = random.Random(seed)
    mats = []
    for _ in range(r):
        e = [[0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                e[i][j] = e[j][i] = rng.randint(lo, hi)
        mats.append(Mat(e))
    return MatrixTuple.from_matrices(mats)


def random_generic_family(seed, m=3, lo=-5, hi=5) -> RankOneFamily:
    rng = random.Random(seed)
    while True:
        vs = [[rng.randint(lo, hi) for _ in range(m)] for _ in range(m + 1)]
        if any(all(v == 0 for v in vec) for vec in vs):
            continue
        fam = RankOneFamily.from_vectors(vs)
        if fam.generic:
            return fam


def random_invertible(seed, n, lo=-5, hi=5) -> Mat:
    rng = random.Random(seed)
    while True:
        M = Mat([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        if M.det() != 0:
            return M
