import math
import random

import pytest
from hypothesis import settings, strategies as st

from clusterfix.seedcore import ExchangeMatrix

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

A2 = ExchangeMatrix.make([[0, 1], [-1, 0]])
A3 = ExchangeMatrix.make([[0, 1, 0], [-1, 0, 1], [0, -1, 0]])
B2 = ExchangeMatrix.make([[0, 1], [-2, 0]], [1, 2])
MARKOV = ExchangeMatrix.make([[0, 2, -2], [-2, 0, 2], [2, -2, 0]])
KRONECKER = ExchangeMatrix.make([[0, 2], [-2, 0]])
RANK1 = ExchangeMatrix.make([[0]])


def x7_matrix():
    eps = [[0] * 7 for _ in range(7)]

    def arrow(i, j, m=1):
        eps[i][j] += m
        eps[j][i] -= m

    for j in (1, 3, 5):
        arrow(0, j)
        arrow(j, j + 1, 2)
    for j in (2, 4, 6):
        arrow(j, 0)
    return ExchangeMatrix.make(eps)


X7 = x7_matrix()
FIXTURES = {"A2": A2, "A3": A3, "B2": B2, "Markov": MARKOV, "Kronecker": KRONECKER,
            "A1": RANK1, "X7": X7}


def random_exchange_matrix(rng: random.Random, n_max: int = 6, entry_max: int = 4, d_max: int = 3) -> ExchangeMatrix:
    """eps_ij d_j = r lcm(d_i, d_j) with |eps| <= entry_max."""
    n = rng.randint(1, n_max)
    d = [rng.randint(1, d_max) for _ in range(n)]
    eps = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            l = math.lcm(d[i], d[j])
            rmax = min(entry_max * d[j] // l, entry_max * d[i] // l)
            r = rng.randint(-rmax, rmax)
            eps[i][j] = r * l // d[j]
            eps[j][i] = -r * l // d[i]
    return ExchangeMatrix.make(eps, d)


@st.composite
def exchange_matrices(draw, n_max=6, entry_max=4, d_max=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_exchange_matrix(random.Random(seed), n_max, entry_max, d_max)


@pytest.fixture
def rng():
    return random.Random(12345)
