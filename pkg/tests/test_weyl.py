import numpy as np
import pytest
from hypothesis import given, strategies as st

from clusterfix.fixtures import load
from clusterfix.seedcore import ExchangeMatrix
from clusterfix.weyl import (
    SingularCartan,
    WeylInput,
    degree_matrix,
    log_potentials,
    potential,
    potentials,
    solve_unit_potentials,
    transposed_cartan_check,
    validate_weyl,
    weyl_act,
)

NAMES = ["weyl_a1", "weyl_a1xa1", "weyl_a2"]


def _b2() -> WeylInput:
    # the A2 quiver with cross arrows doubled on the s side
    a2 = load("weyl_a2").weyl
    eps = [list(r) for r in a2.eps.eps]
    for i in range(3):
        for j in range(3, 6):
            eps[i][j] *= 2
    return WeylInput(("s", "u"), [[2, -1], [-2, 2]], [[0, 2], [-1, 0]], 3,
                     ExchangeMatrix.make(eps, [2, 2, 2, 1, 1, 1]), a2.labeling)


B2W = _b2()
INPUTS = [load(n).weyl for n in NAMES] + [B2W]
points = st.lists(st.floats(-2, 2), min_size=6, max_size=6)


@pytest.mark.parametrize("w", INPUTS, ids=NAMES + ["b2"])
def test_fixtures_validate(w):
    rep = validate_weyl(w)
    assert rep.ok, rep.failures
    assert transposed_cartan_check(w)


def test_validation_failures():
    a2 = load("weyl_a2").weyl
    bad = WeylInput(a2.S, [[2, 1], [-1, 2]], a2.coxeter_eps, a2.m, a2.eps, a2.labeling)
    assert not validate_weyl(bad)
    bad = WeylInput(a2.S, a2.cartan, [[0, 2], [-2, 0]], a2.m, a2.eps, a2.labeling)
    assert not validate_weyl(bad)
    bad = WeylInput(a2.S, a2.cartan, a2.coxeter_eps, a2.m, a2.eps, a2.labeling[:-1] + ((0, 0),))
    assert any("bijection" in f for f in validate_weyl(bad).failures)
    eps = [list(r) for r in a2.eps.eps]
    eps[0][3], eps[3][0] = 0, 0
    bad = WeylInput(a2.S, a2.cartan, a2.coxeter_eps, a2.m, ExchangeMatrix.make(eps), a2.labeling)
    assert not validate_weyl(bad)


def test_a1_potential():
    w = load("weyl_a1").weyl
    P = potential(w, 0)
    assert all(c == 1 for _, c in P.terms)
    assert len(P.terms) == w.m
    assert all(sum(a) == -2 for a in P.support)


def test_degree_matrix_is_minus_cartan_transpose():
    assert degree_matrix(B2W) == [[-2, 2], [1, -2]]
    assert set(potentials(B2W)) == {"s", "u"}


@pytest.mark.parametrize("w", INPUTS, ids=NAMES + ["b2"])
@given(x=points)
def test_involution_and_transformation_law(w, x):
    n = w.eps.n
    x = np.array(x[:n] + [0.0] * (n - len(x[:n])))
    for s in range(w.rank):
        y = weyl_act(w, s, x).array()
        assert np.allclose(weyl_act(w, s, y).array(), x, atol=1e-10)
        before, after = log_potentials(w, x), log_potentials(w, y)
        for u in range(w.rank):
            assert after[u] == pytest.approx(before[u] - w.cartan[s][u] * before[s], abs=1e-10)


@pytest.mark.parametrize("w", INPUTS, ids=NAMES + ["b2"])
def test_solve_unit_potentials(w):
    rng = np.random.default_rng(5)
    for _ in range(10):
        x0 = rng.uniform(-3, 3, w.eps.n)
        x = solve_unit_potentials(w, x0).array()
        assert np.abs(log_potentials(w, x)).max() <= 1e-9
        for s in range(w.rank):
            assert np.allclose(weyl_act(w, s, x).array(), x, atol=1e-9)


def test_b2_distinguishes_transposition():
    # with C_us instead of C_su the law fails for B2
    x = np.linspace(-1, 1, 6)
    before = log_potentials(B2W, x)
    after = log_potentials(B2W, weyl_act(B2W, 0, x).array())
    right = before[1] - B2W.cartan[0][1] * before[0]
    wrong = before[1] - B2W.cartan[1][0] * before[0]
    assert after[1] == pytest.approx(right, abs=1e-12)
    assert abs(after[1] - wrong) > 1e-3


def test_singular_cartan():
    # affine A1: C = [[2, -2], [-2, 2]] has no unit-potential solve
    a2 = load("weyl_a2").weyl
    eps = [list(r) for r in a2.eps.eps]
    for i in range(3):
        for j in range(3, 6):
            eps[i][j] *= 2
            eps[j][i] *= 2
    w = WeylInput(("s", "u"), [[2, -2], [-2, 2]], [[0, 2], [-2, 0]], 3, ExchangeMatrix.make(eps), a2.labeling)
    assert validate_weyl(w)
    with pytest.raises(SingularCartan):
        solve_unit_potentials(w, np.zeros(6))


def test_json_roundtrip():
    w = load("weyl_a2").weyl
    assert WeylInput.from_json(w.to_json()) == w
