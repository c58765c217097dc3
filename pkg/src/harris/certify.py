"""Drift / minorization checks and one-step contraction constants.

Given ``P V <= gamma V + K`` and a minorization ``P(x, .) >= alpha nu`` on the
level set ``C = {V <= R}`` with ``R > 2K / (1 - gamma)``, the kernel contracts
``rho_beta`` with

    beta      = alpha0 / K
    gamma0    = gamma + 2K / R
    gamma1    = (2 + beta R gamma0) / (2 + beta R)
    gamma2    = max(1 - (alpha - alpha0), gamma)
    alpha_bar = max(gamma1, gamma2)

for any ``alpha0`` in ``(0, alpha)``. Pairs with ``V(x) + V(y) >= R`` contract
by ``gamma1`` through the drift alone; pairs inside ``C`` contract by
``gamma2`` because the residual kernel ``(P - alpha nu) / (1 - alpha)`` is
nonnegative there.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Tuple

import numpy as np

from .core import Kernel, Measure, apply_to_function, as_weight
from .errors import (
    CertError,
    EmptyLevelSet,
    NoFeasiblePoint,
    NoMinorization,
    ParamError,
    RTooSmall,
)
from .metrics import pairwise_rho, weights

SLACK_TOL = 1e-12
#: relative margin used for the strict inequality R > 2K / (1 - gamma)
STRICT_MARGIN = 1e-9
K_FLOOR = 1e-12
VERIFY_TOL = 1e-10

GAMMA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
R_SCALES = (1.0 + 1e-6, 1.25, 1.5, 2.0)


@dataclass(frozen=True, eq=False)
class DriftCertificate:
    gamma: float
    K: float
    slack: np.ndarray
    valid: bool

    @property
    def min_slack(self) -> float:
        return float(self.slack.min())


@dataclass(frozen=True, eq=False)
class MinorizationCertificate:
    R: float
    C: Tuple[int, ...]
    alpha: float
    nu: Measure
    residual_ok: bool
    notes: Tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class ContractionCertificate:
    gamma: float
    K: float
    alpha: float
    R: float
    alpha0: float
    beta: float
    gamma0: float
    gamma1: float
    gamma2: float
    alpha_bar: float
    empirically_verified: bool = False
    k_clamped: bool = False
    notes: Tuple[str, ...] = ()
    drift: Optional[DriftCertificate] = field(default=None, repr=False)
    minorization: Optional[MinorizationCertificate] = field(default=None, repr=False)

    def replace(self, **changes) -> "ContractionCertificate":
        return replace(self, **changes)


@dataclass(frozen=True)
class ContractionCheck:
    """Outcome of :func:`verify_pointwise_contraction`."""

    alpha_bar: float
    max_dirac_ratio: float
    worst_pair: Optional[Tuple[int, int]]
    dirac_ok: bool
    max_measure_ratio: float
    n_measure_pairs: int
    measures_ok: bool

    @property
    def passed(self) -> bool:
        return self.dirac_ok and self.measures_ok


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ParamError(f"gamma must lie in (0, 1), got {gamma!r}")
    return gamma


def check_drift(k: Kernel, V, gamma: float, K: float) -> DriftCertificate:
    """Check ``(P V)(x) <= gamma V(x) + K`` at every state."""
    V = as_weight(V, k.n)
    gamma = _check_gamma(gamma)
    if not K >= 0:
        raise ParamError(f"K must be >= 0, got {K!r}")
    slack = gamma * V.values + K - apply_to_function(k, V.values)
    slack.setflags(write=False)
    return DriftCertificate(gamma, float(K), slack, bool(slack.min() >= -SLACK_TOL))


def fit_K(k: Kernel, V, gamma: float) -> float:
    """Smallest ``K >= 0`` making the drift inequality hold for this ``gamma``."""
    V = as_weight(V, k.n)
    gamma = _check_gamma(gamma)
    excess = apply_to_function(k, V.values) - gamma * V.values
    return float(max(0.0, excess.max()))


def level_set(V, R: float) -> np.ndarray:
    return np.flatnonzero(as_weight(V).values <= R)


def minorize_rows(rows: np.ndarray, C: Iterable[int]) -> Tuple[float, np.ndarray]:
    """Componentwise minimum over the rows in ``C``: returns ``(alpha, m)``."""
    m = rows[np.asarray(list(C), dtype=int)].min(axis=0)
    return float(min(1.0, m.sum())), m


def extract_minorization(k: Kernel, V, R: float) -> MinorizationCertificate:
    """Maximal ``(alpha, nu)`` with ``P(x, .) >= alpha nu`` for every ``x`` in ``{V <= R}``."""
    V = as_weight(V, k.n)
    C = level_set(V, R)
    if C.size == 0:
        raise EmptyLevelSet(f"no state has V <= {R!r} (min V = {V.values.min()!r})")
    alpha, m = minorize_rows(k.rows, C)
    if not alpha > 0:
        raise NoMinorization(
            f"rows of the level set {{V <= {R:g}}} ({C.size} states) have disjoint supports"
        )
    nu = Measure(m / m.sum())
    residual = k.rows[C] - alpha * nu.weights[None, :]
    notes = ()
    if alpha >= 1.0:
        notes = ("alpha = 1 accepted (outside the open interval (0, 1); formulas stay valid)",)
    return MinorizationCertificate(
        float(R), tuple(int(c) for c in C), alpha, nu, bool(residual.min() >= -SLACK_TOL), notes
    )


def contraction_constants(
    gamma: float, K: float, alpha: float, R: float, alpha0: float
) -> ContractionCertificate:
    """Explicit one-step contraction constants in ``rho_beta``."""
    gamma = _check_gamma(gamma)
    K, alpha, R, alpha0 = float(K), float(alpha), float(R), float(alpha0)
    if not K > 0:
        raise ParamError(f"K > 0 required (beta = alpha0 / K), got {K!r}")
    if not 0.0 < alpha <= 1.0:
        raise ParamError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not 0.0 < alpha0 < alpha:
        raise ParamError(f"alpha0 must lie in (0, alpha={alpha!r}), got {alpha0!r}")
    threshold = 2.0 * K / (1.0 - gamma)
    if not R >= (1.0 + STRICT_MARGIN) * threshold:
        raise RTooSmall(f"R = {R!r} does not exceed 2K/(1-gamma) = {threshold!r}")
    gamma0 = gamma + 2.0 * K / R
    if not gamma0 < 1.0:
        raise RTooSmall(f"gamma + 2K/R = {gamma0!r} is not < 1")
    beta = alpha0 / K
    gamma1 = (2.0 + beta * R * gamma0) / (2.0 + beta * R)
    gamma2 = max(1.0 - (alpha - alpha0), gamma)
    alpha_bar = max(gamma1, gamma2)
    if not alpha_bar < 1.0:
        raise ParamError(f"alpha_bar = {alpha_bar!r} is not < 1 in floating point")
    notes = ()
    if alpha >= 1.0:
        notes = ("alpha = 1 accepted (outside the open interval (0, 1); formulas stay valid)",)
    return ContractionCertificate(
        gamma=gamma, K=K, alpha=alpha, R=R, alpha0=alpha0, beta=beta,
        gamma0=gamma0, gamma1=gamma1, gamma2=gamma2, alpha_bar=alpha_bar, notes=notes,
    )


def dirac_contraction_ratio(k: Kernel, V, beta: float) -> Tuple[float, Optional[Tuple[int, int]]]:
    """Largest ``rho_beta(P delta_x, P delta_y) / d_beta(x, y)`` over ``x != y``."""
    w = weights(as_weight(V, k.n), beta)
    n = k.n
    if n == 1:
        return 0.0, None
    best, pair = -1.0, None
    P = k.rows
    for x in range(n - 1):
        num = np.abs(P[x + 1:] - P[x]) @ w
        ratio = num / (w[x] + w[x + 1:])
        j = int(np.argmax(ratio))
        if ratio[j] > best:
            best, pair = float(ratio[j]), (x, x + 1 + j)
    return best, pair


def _random_measure_pairs(n: int, count: int, rng: np.random.Generator):
    # mix diffuse and nearly-atomic measures
    half = count // 2
    diffuse = rng.dirichlet(np.ones(n), size=(2, count - half))
    sharp = rng.dirichlet(np.full(n, 0.05), size=(2, half))
    A = np.vstack([diffuse[0], sharp[0]])
    B = np.vstack([diffuse[1], sharp[1]])
    return A, B[rng.permutation(count)]


def verify_pointwise_contraction(
    k: Kernel,
    V,
    cert: ContractionCertificate,
    n_random: int = 1000,
    seed: int = 0,
    tol: float = VERIFY_TOL,
) -> ContractionCheck:
    """Check the contraction in dual form on all Dirac pairs and on random measures."""
    V = as_weight(V, k.n)
    w = weights(V, cert.beta)
    max_ratio, pair = dirac_contraction_ratio(k, V, cert.beta)
    dirac_ok = max_ratio <= cert.alpha_bar + tol

    rng = np.random.default_rng(seed)
    A, B = _random_measure_pairs(k.n, n_random, rng)
    before = pairwise_rho(A, B, w)
    after = pairwise_rho(A @ k.rows, B @ k.rows, w)
    measures_ok = bool(np.all(after <= cert.alpha_bar * before + tol))
    pos = before > 0
    mratio = float(np.max(after[pos] / before[pos])) if pos.any() else 0.0
    return ContractionCheck(
        alpha_bar=cert.alpha_bar,
        max_dirac_ratio=max(0.0, max_ratio),
        worst_pair=pair,
        dirac_ok=bool(dirac_ok),
        max_measure_ratio=mratio,
        n_measure_pairs=int(n_random),
        measures_ok=measures_ok,
    )


def certify_fixed(
    k: Kernel, V, gamma: float, R: float, alpha0: Optional[float] = None, K: Optional[float] = None
) -> ContractionCertificate:
    """Build and verify a certificate for user-chosen ``gamma`` and ``R``.

    ``K`` defaults to :func:`fit_K`; ``alpha0`` defaults to ``alpha / 2``.
    """
    V = as_weight(V, k.n)
    if K is None:
        K = fit_K(k, V, gamma)
    drift = check_drift(k, V, gamma, K)
    if not drift.valid:
        raise CertError(f"drift fails with gamma={gamma!r}, K={K!r} (min slack {drift.min_slack:.3g})")
    clamped = K <= 0
    if clamped:
        K = K_FLOOR
    minor = extract_minorization(k, V, R)
    if alpha0 is None:
        alpha0 = minor.alpha / 2
    cert = contraction_constants(gamma, K, minor.alpha, R, alpha0)
    return _finish(k, V, cert, drift, minor, clamped)


def _finish(k, V, cert, drift, minor, clamped) -> ContractionCertificate:
    notes = tuple(cert.notes)
    if clamped:
        notes += (f"K = 0 from fit; clamped to {K_FLOOR:g} so that beta = alpha0 / K is defined",)
    cert = cert.replace(k_clamped=clamped, notes=notes, drift=drift, minorization=minor)
    check = verify_pointwise_contraction(k, V, cert)
    if not check.passed:
        raise CertError(
            f"contraction check failed: Dirac ratio {check.max_dirac_ratio!r}, "
            f"measure ratio {check.max_measure_ratio!r} vs alpha_bar {cert.alpha_bar!r}"
        )
    return cert.replace(empirically_verified=True)


def optimize_constants(
    k: Kernel, V, extra_gammas: Iterable[float] = (), verify: bool = True
) -> ContractionCertificate:
    """Grid search for the smallest ``alpha_bar``.

    ``gamma`` runs over ``0.05, ..., 0.95`` (plus ``extra_gammas``) with ``K``
    fitted; ``R`` over the distinct values of ``V`` and the threshold
    ``2K / (1 - gamma)``, each scaled by ``1 + 1e-6, 1.25, 1.5, 2``;
    ``alpha0`` over ``alpha/4, alpha/2, 3 alpha/4``. Ties go to smaller
    ``gamma``, then smaller ``R``, then larger ``alpha0``.
    """
    V = as_weight(V, k.n)
    levels = np.unique(V.values)
    gammas = sorted(set(GAMMA_GRID) | {float(g) for g in extra_gammas})
    minor_cache = {}
    best = None  # (alpha_bar, cert, clamped)

    for gamma in gammas:
        K = fit_K(k, V, gamma)
        clamped = K <= 0
        K_eff = K_FLOOR if clamped else K
        threshold = 2.0 * K_eff / (1.0 - gamma)
        radii = np.unique(np.concatenate([np.outer(levels, R_SCALES).ravel(),
                                          threshold * np.asarray(R_SCALES)]))
        for R in radii:
            if R < (1.0 + STRICT_MARGIN) * threshold:
                continue
            size = int(np.searchsorted(levels, R, side="right"))
            if size == 0:
                continue
            if size not in minor_cache:
                try:
                    minor_cache[size] = extract_minorization(k, V, levels[size - 1])
                except NoMinorization:
                    minor_cache[size] = None
            minor = minor_cache[size]
            if minor is None:
                continue
            a = minor.alpha
            for alpha0 in (3 * a / 4, a / 2, a / 4):
                try:
                    cert = contraction_constants(gamma, K_eff, a, float(R), alpha0)
                except ParamError:
                    continue
                if best is None or cert.alpha_bar < best[0]:
                    best = (cert.alpha_bar, cert, clamped, minor)

    if best is None:
        raise NoFeasiblePoint("no (gamma, R, alpha0) grid cell gives drift + minorization with alpha_bar < 1")
    _, cert, clamped, minor = best
    minor = MinorizationCertificate(cert.R, minor.C, minor.alpha, minor.nu, minor.residual_ok, minor.notes)
    drift = check_drift(k, V, cert.gamma, cert.K)
    if not verify:
        notes = cert.notes + ((f"K = 0 from fit; clamped to {K_FLOOR:g}",) if clamped else ())
        return cert.replace(k_clamped=clamped, notes=notes, drift=drift, minorization=minor)
    return _finish(k, V, cert, drift, minor, clamped)
