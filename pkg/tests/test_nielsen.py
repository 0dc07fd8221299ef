import math

import numpy as np
import pytest

from clusterfix.convexgeom import kernel_basis
from clusterfix.fixtures import load
from clusterfix.laurent import LaurentPolynomial, expand_cluster_variable, variables
from clusterfix.modulargroup import MutationLoop, act_point, close_subgroup
from clusterfix.nielsen import (
    DTNotFound,
    Diverging,
    InvarianceFailed,
    MinimizeOptions,
    NotInKernel,
    VerificationFailed,
    adjacent_clusters,
    build_dt_filling,
    build_puncture_filling,
    ensemble_project,
    fiber_flow,
    find_fixed_point,
    minimize,
    orbit,
    potential_from_triangulation,
    verify_filling,
)
from clusterfix.objective import LogLaurentFunction, MaxObjective

from conftest import A2, A3, B2, KRONECKER, MARKOV, RANK1, X7

PHI = (1 + math.sqrt(5)) / 2
TAU = MutationLoop(A2, (0, (0, 1)))
MARKOV_ROT = MutationLoop(MARKOV, ((0, 1), (1, 2)))
TORUS_W = potential_from_triangulation([(0, 1, 2), (0, 1, 2)])


def test_adjacent_clusters_a2():
    A0, A1 = variables(2)
    one = LaurentPolynomial.constant(2)
    assert adjacent_clusters(A2) == [A0, A1, (one + A1) * A0**-1, (one + A0) * A1**-1]


@pytest.mark.parametrize("em,size", [(A2, 5), (A3, 8), (B2, 5), (RANK1, 2)])
def test_dt_filling(em, size):
    fs = build_dt_filling(em)
    assert fs.verified
    assert len(fs) == size
    assert all(w > 0 for w in fs.balanced.weights)


def test_dt_filling_not_found():
    with pytest.raises(DTNotFound) as e:
        build_dt_filling(MARKOV, depth=4)
    assert e.value.depth == 4 and e.value.explored > 0


def test_torus_potential():
    W = TORUS_W
    assert W.n == 3 and len(W) == 3
    assert all(c == 2 for c in W.terms.values())
    assert W.terms[(1, -1, -1)] == 2
    with pytest.raises(ValueError):
        potential_from_triangulation([(0, 1)])
    with pytest.raises(ValueError):
        potential_from_triangulation([(0, 1, 5)], n=3)


def test_puncture_filling_torus():
    fs = build_puncture_filling(MARKOV, TORUS_W)
    assert fs.verified
    assert fs.slope.rank == 2 and fs.slope.target_dim == 2
    with pytest.raises(VerificationFailed) as e:
        build_puncture_filling(MARKOV, None)
    bal = e.value.balanced
    assert not bal.balanced
    assert bal.witness == (-1, -1, -1)
    assert kernel_basis(MARKOV).contains(bal.witness)
    fs = build_puncture_filling(MARKOV, None, strict=False)
    assert not fs.verified and fs.slope.spans


def test_a2_with_negative_monomial():
    # the monomial A0^-1 A1^-1 balances the initial cluster, but monomials have no slope
    A0, A1 = variables(2)
    bal, slope = verify_filling([A0, A1, (A0 * A1) ** -1], A2)
    assert bal.balanced and not slope.spans and slope.rank == 0
    bal, slope = verify_filling([A0, A1, (A0 * A1) ** -1, expand_cluster_variable((0, 1), 1, A2)], A2)
    assert bal.balanced and slope.spans


def test_verify_filling_rejects_bad_input():
    A0, A1 = variables(2)
    with pytest.raises(ValueError):
        verify_filling([A0 - A1], A2)
    with pytest.raises(ValueError):
        verify_filling([A0, A1], A2, S=[(-1, 0)])


def test_orbit_sizes():
    G = close_subgroup([TAU])
    L = orbit(build_dt_filling(A2), G)
    assert len(L.parts) == 5
    fs = build_puncture_filling(MARKOV, TORUS_W)
    L = orbit(fs, close_subgroup([MARKOV_ROT]))
    assert len(L.parts) == 7


def test_fiber_flow_and_ensemble():
    beta = (1, 1, 1)
    x = np.array([0.3, -0.2, 1.0])
    y = fiber_flow(x, beta, 2.0, MARKOV)
    assert np.allclose(y.array(), x + 2.0)
    assert np.allclose(ensemble_project(y, MARKOV).array(), ensemble_project(x, MARKOV).array())
    with pytest.raises(NotInKernel):
        fiber_flow(x, (1, 0, 0), 1.0, MARKOV)


def test_minimize_small_examples():
    one = LogLaurentFunction(1, (((1,), 1), ((-1,), 1)))
    r = minimize(MaxObjective([one]))
    assert abs(r.x[0]) < 1e-9 and r.value == pytest.approx(math.log(2), abs=1e-12)
    A0, A1 = variables(2)
    L = MaxObjective([LogLaurentFunction.from_laurent(F) for F in (A0, A1, (A0 * A1) ** -1)])
    r = minimize(L)
    assert np.allclose(r.x, 0, atol=1e-9)
    assert r.certificate.contains and r.active == (0, 1, 2)


def test_minimize_diverging():
    A0, A1 = variables(2)
    L = MaxObjective([LogLaurentFunction.from_laurent(F) for F in (A0, A1)])
    with pytest.raises(Diverging) as e:
        minimize(L)
    assert all(a <= 0 for a in e.value.witness)
    with pytest.raises(Diverging):
        minimize(L, MinimizeOptions(check_coercive=False, box=50))


def test_x7_diverges_along_beta():
    b = load("x7")
    fs = b.filling()
    assert not fs.balanced.balanced
    with pytest.raises(Diverging) as e:
        minimize(orbit(fs, []), eps=X7)
    w = np.array(e.value.witness, dtype=float)
    beta = np.array([2, 1, 1, 1, 1, 1, 1], dtype=float)
    cos = abs(w @ beta) / (np.linalg.norm(w) * np.linalg.norm(beta))
    assert cos == pytest.approx(1.0, abs=1e-12)


def test_a2_fixed_point():
    fs = build_dt_filling(A2)
    r = find_fixed_point([TAU], fs)
    assert r.value == pytest.approx(math.log(PHI), abs=1e-12)
    assert np.allclose(r.x_star.array(), math.log(PHI), atol=1e-9)
    assert max(r.invariance) < 1e-9
    assert r.group_order == 5
    assert r.optimality.contains
    assert len(r.active) == 5


def test_torus_fixed_point():
    fs = build_puncture_filling(MARKOV, TORUS_W)
    r = find_fixed_point([MARKOV_ROT], fs)
    assert np.allclose(r.x_star.array(), math.log(3) / 2, atol=1e-9)
    assert r.value == pytest.approx(math.log(2 * math.sqrt(3)), abs=1e-12)
    assert r.group_order == 3
    assert r.fiber == (True,)
    assert np.allclose(r.x_image.array(), 0, atol=1e-12)


def test_fixed_point_is_a_global_minimum():
    fs = build_dt_filling(A2)
    G = close_subgroup([TAU])
    L = orbit(fs, G)
    r = find_fixed_point([TAU], fs)
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.uniform(-4, 4, 2)
        assert L(x) >= r.value - 1e-12
        # G-invariance of the objective
        for g in G:
            assert L(act_point(g, x).array()) == pytest.approx(L(x), abs=1e-10)


def test_restarts_agree():
    fs = build_puncture_filling(MARKOV, TORUS_W)
    rng = np.random.default_rng(1)
    ref = find_fixed_point([MARKOV_ROT], fs).x_star.array()
    for _ in range(5):
        x0 = tuple(rng.uniform(-3, 3, 3))
        r = find_fixed_point([MARKOV_ROT], fs, MinimizeOptions(x0=x0))
        assert np.abs(r.x_star.array() - ref).max() < 1e-6


def test_invariance_failure_detected(monkeypatch):
    # without the orbit closure the minimizer is not fixed by tau
    import clusterfix.nielsen as nielsen

    fs = build_dt_filling(A2)
    lopsided = list(fs.elements[:2]) + [fs.elements[-1] * LaurentPolynomial.constant(2, 7)]
    r = minimize(orbit(lopsided, []))
    assert np.abs(act_point(TAU, r.x).array() - r.x).max() > 1e-3
    monkeypatch.setattr(nielsen, "close_subgroup", lambda gens, bound: [MutationLoop(A2, ())])
    with pytest.raises(InvarianceFailed):
        find_fixed_point([TAU], lopsided)
