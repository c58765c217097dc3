import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harris.core import Measure
from harris.errors import DimensionError, MassMismatch, ParamError
from harris.metrics import (
    best_shift,
    dbeta_matrix,
    dbeta_point,
    lipschitz_seminorm,
    optimal_shift,
    rho_beta,
    rho_beta_dual,
    weighted_sup_norm,
)


def brute_seminorm(phi, V, beta):
    """Plain double loop over ordered pairs."""
    best = 0.0
    for x, y in itertools.product(range(len(phi)), repeat=2):
        if x != y:
            best = max(best, abs(phi[x] - phi[y]) / (2 + beta * V[x] + beta * V[y]))
    return best


def test_weighted_sup_norm_examples():
    V = np.array([0.0, 1.0, 2.0])
    assert weighted_sup_norm(1 + V, V, 1.0) == 1.0
    assert weighted_sup_norm(np.zeros(3), V, 1.0) == 0.0
    # quotients 1/1, 3/1.5, 4/2
    assert weighted_sup_norm([1.0, 3.0, -4.0], V, 0.5) == 2.0
    with pytest.raises(DimensionError):
        weighted_sup_norm([1.0], V, 1.0)
    with pytest.raises(ParamError):
        weighted_sup_norm([1.0, 1.0, 1.0], V, 0.0)


def test_dbeta_point_examples():
    V = [0.0, 1.0, 2.0]
    assert dbeta_point(1, 1, V, 1.0) == 0.0
    assert dbeta_point(0, 2, V, 1.0) == 4.0
    assert dbeta_point(0, 1, [1.0, 2.0], 0.25) == 2.75
    with pytest.raises(DimensionError):
        dbeta_point(0, 3, V, 1.0)


def test_lipschitz_seminorm_examples():
    assert lipschitz_seminorm([4.0, 4.0, 4.0], [0.0, 1.0, 5.0], 0.3) == 0.0
    assert lipschitz_seminorm([7.0], [1.0], 1.0) == 0.0
    assert lipschitz_seminorm([0.0, 2.0], [0.0, 0.0], 1.0) == 1.0
    assert lipschitz_seminorm([0.0, 5.0], [0.0, 3.0], 1.0) == 1.0


def test_lipschitz_seminorm_matches_double_loop():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = rng.integers(2, 9)
        phi, V, beta = rng.normal(size=n) * 5, rng.uniform(0, 4, n), rng.uniform(0.05, 3)
        assert lipschitz_seminorm(phi, V, beta) == pytest.approx(brute_seminorm(phi, V, beta), rel=1e-15)


def test_optimal_shift_examples():
    V = np.array([0.0, 2.0, 5.0])
    c = optimal_shift(np.zeros(3), V, 1.0)
    assert c == 1.0
    assert weighted_sup_norm(np.zeros(3) + c, V, 1.0) <= 1.0
    c0 = 0.3
    c = optimal_shift(np.full(3, c0), V, 0.5)
    assert c == pytest.approx(1 + 0.5 * V.min() - c0)
    assert weighted_sup_norm(np.full(3, c0) + c, V, 0.5) <= 1.0


def test_optimal_shift_on_unit_seminorm_functions():
    rng = np.random.default_rng(5)
    for _ in range(50):
        V, beta = rng.uniform(0, 3, 5), rng.uniform(0.1, 2)
        phi = rng.normal(size=5)
        phi /= lipschitz_seminorm(phi, V, beta)
        c = optimal_shift(phi, V, beta)
        # exhaustive check of the pointwise bound
        assert np.all(np.abs(phi + c) <= 1 + beta * V + 1e-12)
        assert weighted_sup_norm(phi + c, V, beta) <= 1 + 1e-12


def test_best_shift_handles_constants():
    V = [0.0, 1.0]
    phi = np.array([2.5, 2.5])
    assert weighted_sup_norm(phi + best_shift(phi, V, 1.0), V, 1.0) == 0.0


def test_rho_beta_examples():
    V = [0.0, 1.0, 2.0]
    mu = Measure([0.2, 0.3, 0.5])
    assert rho_beta(mu, mu, V, 1.0) == 0.0
    d02 = rho_beta(Measure.delta(3, 0), Measure.delta(3, 2), V, 1.0)
    assert d02 == 4.0 == dbeta_point(0, 2, V, 1.0)
    # 0.5 * 1.25 + 0.5 * 1.5
    assert rho_beta(Measure([1.0, 0.0]), Measure([0.5, 0.5]), [1.0, 2.0], 0.25) == pytest.approx(1.375, abs=1e-15)
    with pytest.raises(DimensionError):
        rho_beta(Measure.uniform(2), Measure.uniform(3), V, 1.0)


def test_rho_beta_rejects_unequal_mass():
    with pytest.raises(MassMismatch):
        rho_beta([1.0, 0.0], [0.5, 0.0], [0.0, 1.0], 1.0)


def test_rho_beta_dual_examples():
    V = [0.0, 1.0, 2.0]
    mu = Measure([0.2, 0.3, 0.5])
    assert rho_beta_dual(mu, mu, V, 1.0) == 0.0
    assert rho_beta_dual(Measure.delta(3, 0), Measure.delta(3, 2), V, 1.0) == 4.0
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.dirichlet(np.ones(10), size=2)
        V10 = rng.uniform(0, 5, 10)
        assert abs(rho_beta_dual(a, b, V10, 0.7) - rho_beta(a, b, V10, 0.7)) <= 1e-12


def test_dual_sup_is_attained_by_extremal_function():
    # no admissible test function beats the extremal one
    rng = np.random.default_rng(2)
    V = rng.uniform(0, 3, 6)
    a, b = rng.dirichlet(np.ones(6), size=2)
    target = rho_beta_dual(a, b, V, 0.4)
    w = 1 + 0.4 * V
    phis = rng.uniform(-1, 1, size=(2000, 6)) * w
    assert np.max(phis @ (a - b)) <= target + 1e-12


vectors = st.integers(2, 8).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0, 20), min_size=n, max_size=n),
        st.lists(st.floats(-50, 50), min_size=n, max_size=n),
        st.floats(1e-3, 1e3),
    )
)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_dbeta_is_a_metric(data):
    V, _, beta = data
    D = dbeta_matrix(V, beta)
    n = len(V)
    assert np.all(np.diag(D) == 0)
    assert np.all(D == D.T)
    off = ~np.eye(n, dtype=bool)
    assert np.all(D[off] >= 2)
    for x, y, z in itertools.product(range(n), repeat=3):
        assert D[x, z] <= D[x, y] + D[y, z] + 1e-9 * D[x, z]


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_norm_equivalence(data):
    V, phi, beta = data
    ref = weighted_sup_norm(phi, V, 1.0)
    scaled = weighted_sup_norm(phi, V, beta)
    assert ref <= max(1.0, beta) * scaled * (1 + 1e-12)
    assert scaled <= max(1.0, 1.0 / beta) * ref * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_seminorm_below_norm_and_shift_attains_it(data):
    V, phi, beta = data
    s = lipschitz_seminorm(phi, V, beta)
    assert s <= weighted_sup_norm(phi, V, beta) * (1 + 1e-12)
    c = best_shift(phi, V, beta)
    assert weighted_sup_norm(np.asarray(phi) + c, V, beta) <= s * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.floats(1e-2, 1e2), st.integers(0, 2**32 - 1))
def test_dirac_distance_equals_point_metric(n, beta, seed):
    V = np.random.default_rng(seed).uniform(0, 10, n)
    for x, y in itertools.permutations(range(n), 2):
        assert rho_beta(Measure.delta(n, x), Measure.delta(n, y), V, beta) == dbeta_point(x, y, V, beta)


def test_small_beta_norm_is_controlled_by_inverse_beta():
    # a weight-heavy function: the beta-norm exceeds max(1, beta) times the reference norm
    V, phi, beta = [10.0], [11.0], 0.5
    assert weighted_sup_norm(phi, V, 1.0) == 1.0
    assert weighted_sup_norm(phi, V, beta) == pytest.approx(11 / 6)
    assert weighted_sup_norm(phi, V, beta) > max(1.0, beta) * weighted_sup_norm(phi, V, 1.0)
