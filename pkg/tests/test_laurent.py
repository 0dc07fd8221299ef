import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from clusterfix import _exact
from clusterfix.convexgeom import kernel_basis
from clusterfix.laurent import (
    LaurentPolynomial,
    NoSuchFactorization,
    NotDivisible,
    SeparationData,
    exact_div,
    expand_cluster,
    expand_cluster_variable,
    separation,
    slope_basis,
    specialize_coefficients,
    support,
    transport,
    transport_path,
    variables,
)
from clusterfix.seedcore import TrackedSeed, explore, g_matrix, mutate_matrix

from conftest import A2, A3, B2, KRONECKER, MARKOV, X7

A0, A1 = variables(2)
ONE = LaurentPolynomial.constant(2)


def lp(n, terms):
    return LaurentPolynomial(n, {tuple(e): c for e, c in terms})


def test_zero_coefficients_dropped():
    p = lp(2, [((0, 0), 0), ((1, 0), 2)])
    assert len(p) == 1
    assert (A0 - A0) == LaurentPolynomial.zero(2)
    with pytest.raises(ValueError):
        lp(2, [((1,), 1)])


def test_exact_division_examples():
    assert exact_div(ONE + A1, ONE + A1) == ONE
    assert exact_div(A0**2 - A1**2, A0 - A1) == A0 + A1
    with pytest.raises(NotDivisible):
        exact_div(ONE + A0, ONE + A1)
    with pytest.raises(ZeroDivisionError):
        exact_div(ONE, LaurentPolynomial.zero(2))
    # Laurent shifts on both sides
    q = exact_div((A0**2 - A1**2) * A0 ** -3, (A0 - A1) * A1**-2)
    assert q == (A0 + A1) * A0**-3 * A1**2
    with pytest.raises(NotDivisible):
        exact_div(3 * A0, 2 * A0)


small_poly = st.dictionaries(
    st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.integers(-5, 5), max_size=5
).map(lambda d: LaurentPolynomial(2, d))


@given(small_poly, small_poly, small_poly)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == LaurentPolynomial.zero(2)


@given(small_poly, small_poly)
def test_division_undoes_multiplication(a, b):
    if not b:
        return
    assert exact_div(a * b, b) == a


def test_expand_examples():
    assert expand_cluster_variable((0,), 0, A2) == (ONE + A1) * A0**-1
    assert expand_cluster_variable((), 1, A2) == A1
    assert expand_cluster_variable((0, 1), 1, A2) == (ONE + A0 + A1) * (A0 * A1) ** -1


def _all_cluster_variables(em, depth=10):
    g = explore(TrackedSeed.initial(em), depth=depth)
    out = set()
    for s in g.nodes.values():
        out.update(expand_cluster(s.path, em))
    return out


@pytest.mark.parametrize("em,count", [(A2, 5), (A3, 9), (B2, 6)])
def test_all_cluster_variables_positive(em, count):
    cvs = _all_cluster_variables(em)
    assert len(cvs) == count
    for F in cvs:
        assert F.is_positive()
        assert all(isinstance(c, int) and c > 0 for c in F.terms.values())


def test_a2_variables_match_closed_forms():
    expected = {A0, A1, (ONE + A1) * A0**-1, (ONE + A0) * A1**-1, (ONE + A0 + A1) * (A0 * A1) ** -1}
    assert _all_cluster_variables(A2) == expected


def test_transport_examples():
    # A0 = (1 + A1') / A0' in the chart mu_0
    assert transport(A0, 0, A2) == (ONE + A1) * A0**-1
    assert transport(ONE, 1, A2) == ONE
    with pytest.raises(NotDivisible):
        transport(A0 + A1**-1, 1, A2)


@pytest.mark.parametrize("em", [A2, A3, B2, MARKOV])
def test_transport_twice_is_identity(em):
    rng = random.Random(3)
    for _ in range(15):
        path = [rng.randrange(em.n) for _ in range(rng.randint(0, 4))]
        cluster = expand_cluster(path, em)
        F = LaurentPolynomial.zero(em.n)
        for _ in range(3):
            mono = LaurentPolynomial.constant(em.n, rng.randint(1, 3))
            for X in cluster:
                mono = mono * X ** rng.randint(0, 2)
            F = F + mono
        for k in range(em.n):
            G = transport(F, k, em)
            assert transport(G, k, mutate_matrix(em, k)) == F


@pytest.mark.parametrize("em", [A2, A3, B2, MARKOV])
def test_expand_then_transport_back(em):
    rng = random.Random(5)
    for _ in range(10):
        path = tuple(rng.randrange(em.n) for _ in range(rng.randint(1, 5)))
        end = TrackedSeed.initial(em).follow(path).eps
        for j in range(em.n):
            F = expand_cluster_variable(path, j, em)
            back, _ = transport_path(F, reversed(path), em)
            del back
            # forward transport lands on the single variable A_j in the end chart
            G, em_end = transport_path(F, path, em)
            assert em_end == end
            assert G == LaurentPolynomial.variable(em.n, j)


def test_support_and_slope_examples():
    F = (ONE + A1) * A0**-1
    assert support(F) == [(-1, 0), (-1, 1)]
    assert slope_basis(F) == [(Fraction(0), Fraction(1))]
    assert slope_basis(A0 * A1) == []
    assert len(slope_basis(ONE + A0 + A1)) == 2
    with pytest.raises(ValueError):
        support(LaurentPolynomial.zero(2))


def test_separation_examples():
    s = separation((ONE + A1) * A0**-1, A2)
    assert s.g == (-1, 0) and s.f_poly == lp(2, [((0, 0), 1), ((1, 0), 1)])
    s = separation(A1, A2)
    assert s.g == (0, 1) and s.f_poly == LaurentPolynomial.constant(2)
    F = (ONE + A0 + A1) * (A0 * A1) ** -1
    s = separation(F, A2)
    assert s.g == (0, -1)
    assert s.f_poly == lp(2, [((0, 0), 1), ((0, 1), 1), ((1, 1), 1)])
    assert s.reassemble(A2) == F
    # 1 + A0 = A0 (1 + p*X_1) does factor; 1 + A0 A1 does not
    assert separation(ONE + A0, A2).g == (1, 0)
    with pytest.raises(NoSuchFactorization):
        separation(ONE + A0 * A1, A2)


def test_separation_needs_principal_coefficients_when_degenerate():
    F = expand_cluster_variable((0,), 0, MARKOV)
    with pytest.raises(ValueError):
        separation(F, MARKOV)
    P = expand_cluster_variable((0,), 0, MARKOV, principal=True)
    s = separation(P, MARKOV)
    assert s.reassemble(MARKOV) == F
    assert specialize_coefficients(P) == F


@pytest.mark.parametrize("em", [A3, B2, MARKOV])
def test_g_vectors_agree_with_tropical_duality(em):
    rng = random.Random(11)
    for _ in range(20):
        path = tuple(rng.randrange(em.n) for _ in range(rng.randint(0, 8)))
        s = TrackedSeed.initial(em).follow(path)
        G = g_matrix(s)
        P = expand_cluster(path, em, principal=True)
        for j in range(em.n):
            sep = separation(P[j], em)
            assert sep.g == G[j]
            assert sep.f_poly.terms[(0,) * em.n] == 1
            assert sep.reassemble(em) == specialize_coefficients(P[j])


@pytest.mark.parametrize("em", [A3, MARKOV, X7])
def test_slopes_orthogonal_to_kernel(em):
    K = kernel_basis(em)
    rng = random.Random(2)
    for _ in range(10):
        path = tuple(rng.randrange(em.n) for _ in range(rng.randint(0, 3)))
        for F in expand_cluster(path, em):
            for b in slope_basis(F):
                assert all(_exact.dot(b, k) == 0 for k in K.basis)


def test_json_roundtrip():
    F = expand_cluster_variable((0, 1, 2, 0), 0, MARKOV)
    assert LaurentPolynomial.from_json(F.to_json()) == F
    assert all(isinstance(t["coef"], str) for t in F.to_json()["terms"])


def test_long_kronecker_path_stays_exact():
    path = (0, 1) * 8
    F = expand_cluster_variable(path, 1, KRONECKER)
    assert F.is_positive()
    assert all(isinstance(c, int) for c in F.terms.values())
    assert max(F.terms.values()) > 2**16
    G, _ = transport_path(F, path, KRONECKER)
    assert G == LaurentPolynomial.variable(2, 1)
