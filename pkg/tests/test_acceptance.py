"""Acceptance criteria. Each test prints one ``[PASS]`` / ``[FAIL]`` line."""

import itertools
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import random_chain
from harris.certify import (
    contraction_constants,
    dirac_contraction_ratio,
    fit_K,
    optimize_constants,
)
from harris.core import Kernel, LyapunovWeight, Measure
from harris.errors import NoFeasiblePoint, NonUniqueStationary, RTooSmall
from harris.examples import all_examples, discretized_ar1, flip_chain
from harris.harris_alt import certify_averaged, check_alt, compute_averaging_N
from harris.metrics import (
    best_shift,
    dbeta_point,
    lipschitz_seminorm,
    rho_beta,
    rho_beta_dual,
    weighted_sup_norm,
)
from harris.solve import exact_invariant, invariant_measure, verify_decay

pytestmark = pytest.mark.acceptance


def test_c1_flip_chain_counterexample(criterion):
    criterion["label"] = "C1 flip chain: alt assumptions hold, spectrum {-1, 1}, no one-step certificate"
    t0 = time.perf_counter()
    ex = flip_chain()
    cert = check_alt(ex.kernel, ex.V, {0}, 0.5, 1.5)
    assert cert.valid
    assert cert.S == (0,) and cert.gamma_tilde == 0.5 and cert.b == 1.5
    assert cert.alpha_tilde == 1.0
    np.testing.assert_array_equal(cert.nu_tilde.weights, [0.0, 1.0])

    eig = np.sort(np.linalg.eigvals(ex.kernel.rows).real)
    assert np.max(np.abs(eig - [-1.0, 1.0])) <= 1e-12

    with pytest.raises(NoFeasiblePoint):
        optimize_constants(ex.kernel, ex.V)
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"{elapsed:.3f} s"
    assert elapsed < 1.0


def test_c2_averaged_operator(criterion):
    criterion["label"] = "C2 averaged flip chain: constructive N and certified contraction"
    ex = flip_chain()
    P, V = ex.kernel.rows, ex.V.values
    g, b = 0.5, 1.5
    cert = check_alt(ex.kernel, ex.V, {0}, g, b)
    R = 1.05 * 2 * b / (1 - g)
    assert R == pytest.approx(6.3)

    # re-derive the depth from its definitions
    n_star = next(n for n in itertools.count() if g ** (-n - 1) / 2 >= R)
    nu_t = np.array([0.0, 1.0])
    ell = next(
        j for j in itertools.count(1) if (nu_t @ np.linalg.matrix_power(P, j - 1))[0] > 0
    )
    assert (n_star, ell) == (3, 2)

    avg = compute_averaging_N(ex.kernel, ex.V, cert, R)
    assert (avg.n_star, avg.ell, avg.N) == (n_star, ell, n_star + 1 + ell) == (3, 2, 6)

    res = certify_averaged(ex.kernel, ex.V, cert, R)
    assert res.certificate.alpha_bar < 1 and res.check.passed

    # sum_k g^k P^(n-k) 1_S, minimised over {V <= g^(-n-1)/2}
    ind = np.array([1.0, 0.0])
    terms = sum(g ** j * np.linalg.matrix_power(P, n_star - j) @ ind for j in range(n_star + 1))
    mask = V <= g ** (-n_star - 1) / 2
    lb = terms[mask].min()
    assert lb >= 1 / (2 * b) - 1e-10
    assert avg.lower_bound2_min == pytest.approx(lb, abs=1e-15)
    criterion["detail"] = f"N={avg.N}, alpha_bar={res.certificate.alpha_bar:.6f}, lower bound {lb:.4f} >= {1 / (2 * b):.4f}"


def test_c3_contraction_constants_sweep(criterion):
    criterion["label"] = "C3 contraction constants: defining equalities on 1000 random points"
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        gamma = rng.uniform(0.01, 0.99)
        K = 10 ** rng.uniform(-3, 1)
        alpha = rng.uniform(0.01, 1.0)
        alpha0 = alpha * rng.uniform(0.01, 0.99)
        R = 2 * K / (1 - gamma) * (1 + 10 ** rng.uniform(-6, 1))
        c = contraction_constants(gamma, K, alpha, R, alpha0)

        beta = alpha0 / K
        gamma0 = gamma + 2 * K / R
        gamma1 = (2 + beta * R * gamma0) / (2 + beta * R)
        gamma2 = max(1 - (alpha - alpha0), gamma)
        errs = [
            abs(c.beta - beta) / max(1.0, beta),
            abs(c.gamma0 - gamma0),
            abs(c.gamma1 - gamma1),
            abs(c.gamma2 - gamma2),
            abs(c.alpha_bar - max(c.gamma1, c.gamma2)),
        ]
        worst = max(worst, *errs)
        assert max(errs) <= 1e-14
        assert c.gamma0 < c.gamma1 < 1
        assert c.alpha_bar < 1
    criterion["detail"] = f"max deviation {worst:.1e}"


def test_c4_contraction_on_random_chains(criterion):
    criterion["label"] = "C4 pointwise contraction on 50 random 20-state chains"
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    certified, tried, worst = 0, 0, 0.0
    while certified < 50:
        tried += 1
        k, V = random_chain(rng, 20)
        try:
            cert = optimize_constants(k, V, verify=False)
        except NoFeasiblePoint:
            continue
        certified += 1
        P, w = k.rows, 1 + cert.beta * V.values

        # 1000 pairs: half dense, half concentrated on a few states
        A = np.vstack([rng.dirichlet(np.ones(20), 500), rng.dirichlet(np.full(20, 0.05), 500)])
        B = np.vstack([rng.dirichlet(np.ones(20), 500), rng.dirichlet(np.full(20, 0.05), 500)])
        before = np.abs(A - B) @ w
        after = np.abs(A @ P - B @ P) @ w
        assert np.all(after <= cert.alpha_bar * before + 1e-10)
        worst = max(worst, float(np.max(after / before)))

        # every Dirac pair
        for x, y in itertools.combinations(range(20), 2):
            lhs = rho_beta(P[x], P[y], V, cert.beta)
            assert lhs <= cert.alpha_bar * dbeta_point(x, y, V, cert.beta) + 1e-10
        ratio, _ = dirac_contraction_ratio(k, V, cert.beta)
        assert ratio <= cert.alpha_bar + 1e-10
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"{certified}/{tried} chains certified, worst ratio {worst:.4f}, {elapsed:.1f} s"
    assert elapsed < 60


def _grid_min_norm(phi, V, beta):
    """min_c ||phi + c||_beta: 10^4-point grid, then golden-section refinement."""
    lo, hi = -phi.max(), -phi.min()
    grid = np.linspace(lo, hi, 10_000)
    w = 1 + beta * V
    vals = np.max(np.abs(phi[None, :] + grid[:, None]) / w[None, :], axis=1)
    i = int(np.argmin(vals))
    if not 0 < i < grid.size - 1 or not vals[i] < min(vals[i - 1], vals[i + 1]):
        return float(vals[i])
    # the objective is convex, so the minimiser sits in the neighbouring cells
    res = minimize_scalar(
        lambda c: weighted_sup_norm(phi + c, V, beta),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        options={"xtol": 1e-15},
    )
    return min(float(vals[i]), float(res.fun))


def test_c5_shift_lemma(criterion):
    criterion["label"] = "C5 seminorm equals the best shifted norm on 500 random triples"
    rng = np.random.default_rng(5)
    worst_gap, worst_shift = 0.0, -np.inf
    for _ in range(500):
        phi = rng.normal(scale=rng.uniform(0.1, 10), size=10)
        V = rng.uniform(0, 10, 10)
        beta = 10 ** rng.uniform(-2, 1)
        s = lipschitz_seminorm(phi, V, beta)
        gap = abs(s - _grid_min_norm(phi, V, beta))
        worst_gap = max(worst_gap, gap)
        assert gap <= 1e-8
        shifted = weighted_sup_norm(phi + best_shift(phi, V, beta), V, beta)
        worst_shift = max(worst_shift, shifted - s)
        assert shifted <= s + 1e-12
    criterion["detail"] = f"max |gap| {worst_gap:.1e}, max shift excess {worst_shift:.1e}"


def test_c6_duality(criterion):
    criterion["label"] = "C6 dual formula matches rho_beta; Dirac distances equal d_beta"
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 30))
        a, b = rng.dirichlet(np.full(n, rng.uniform(0.1, 2)), size=2)
        V, beta = rng.uniform(0, 20, n), 10 ** rng.uniform(-2, 1)
        gap = abs(rho_beta_dual(a, b, V, beta) - rho_beta(a, b, V, beta))
        worst = max(worst, gap)
        assert gap <= 1e-12

    pairs = 0
    for ex in all_examples().values():
        n = ex.kernel.n
        for beta in (0.05, 0.5, 1.0, 3.0):
            for x, y in itertools.permutations(range(n), 2):
                assert rho_beta(Measure.delta(n, x), Measure.delta(n, y), ex.V, beta) == dbeta_point(x, y, ex.V, beta)
                pairs += 1
    criterion["detail"] = f"max dual gap {worst:.1e}; {pairs} Dirac pairs exact"


def test_c7_certified_solver_ar1(criterion):
    criterion["label"] = "C7 certified invariant measure for the discretised AR(1) chain"
    t0 = time.perf_counter()
    ex = discretized_ar1(0.5, 1.0, -6.0, 6.0, 61)
    k, V = ex.kernel, ex.V
    cert = optimize_constants(k, V)
    tol = 1e-10
    run = invariant_measure(k, V, cert, tol=tol, keep_path=True)
    exact = exact_invariant(k)
    w = 1 + cert.beta * V.values
    actual = np.abs(run.path - exact.weights) @ w
    assert np.all(actual <= run.bounds + 1e-9)

    other = invariant_measure(k, V, cert, tol=tol, mu0=Measure.delta(k.n, 0))
    assert rho_beta(run.mu_star, other.mu_star, V, cert.beta) <= 2 * tol

    assert run.mu_star_V <= cert.K / (1 - cert.gamma) + 1e-6

    ok, worst = verify_decay(k, V, cert, exact, n_phi=100, n_max=50)
    assert ok
    elapsed = time.perf_counter() - t0
    criterion["detail"] = (
        f"alpha_bar={cert.alpha_bar:.4f}, {run.iterates} steps, mu*(V)={run.mu_star_V:.4f} "
        f"<= {cert.K / (1 - cert.gamma):.4f}, decay ratio {worst:.3f}, {elapsed:.1f} s"
    )
    assert elapsed < 30


def test_c8_degenerate_inputs(criterion):
    criterion["label"] = "C8 degenerate inputs: identity kernel, K = 0, boundary R"
    ident = Kernel.identity(3)
    with pytest.raises(NonUniqueStationary):
        exact_invariant(ident)
    with pytest.raises(NoFeasiblePoint):
        optimize_constants(ident, [0.0, 1.0, 2.0])

    iid = Kernel([[0.3, 0.7], [0.3, 0.7]])
    zero = LyapunovWeight([0.0, 0.0])
    assert fit_K(iid, zero, 0.5) == 0.0
    cert = optimize_constants(iid, zero)
    assert cert.k_clamped and cert.notes

    gamma, K = 0.5, 1.0
    with pytest.raises(RTooSmall):
        contraction_constants(gamma, K, 0.5, 2 * K / (1 - gamma), 0.25)
    criterion["detail"] = "NonUniqueStationary, NoFeasiblePoint, k_clamped, RTooSmall"
