"""Drift with an indicator term, and the averaged kernel that restores a gap.

The alternative assumptions read

    (P V)(x) <= gamma_t V(x) + b 1_S(x),    V >= 1,
    P(x, .) >= alpha_t nu_t(.)              for x in S.

They do not imply a one-step contraction (the two-state flip chain satisfies
them and has spectrum {-1, 1}), but the Cesaro average
``Q = (1/(N+1)) sum_{k<=N} P^k`` satisfies the plain drift + minorization pair
for a constructive ``N``:

* ``n_star``: smallest ``n`` with ``gamma_t^(-n-1) / 2 >= R``. On
  ``{V <= gamma_t^(-n-1)/2}`` the iterated drift forces
  ``sum_{k<=n} gamma_t^k P^{n-k}(x, S) >= 1/(2b)``.
* ``ell``: smallest ``ell >= 1`` with ``(P^(ell-1) nu_t)(S) > 0``. Then
  ``P^ell nu_t >= alpha_hat nu_t`` and ``nu = (1/ell) sum_{k<ell} P^k nu_t``
  satisfies ``P nu >= alpha_hat nu``.
* ``N = n_star + 1 + ell``.

Averaging ``P^k V <= gamma_t^k V + b (1 - gamma_t^k) / (1 - gamma_t)`` over
``k <= N`` gives ``Q V <= a_N V + K_Q`` with ``a_N = mean(gamma_t^k)`` and
``2 K_Q / (1 - a_N) <= 2b / (1 - gamma_t) < R``, which is why any
``R > 2b / (1 - gamma_t)`` works for ``Q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from .certify import (
    STRICT_MARGIN,
    SLACK_TOL,
    ContractionCertificate,
    ContractionCheck,
    DriftCertificate,
    MinorizationCertificate,
    certify_fixed,
    check_drift,
    extract_minorization,
    fit_K,
    minorize_rows,
    optimize_constants,
    verify_pointwise_contraction,
)
from .core import Kernel, LyapunovWeight, Measure, cesaro_average
from .errors import (
    CertError,
    NoFeasiblePoint,
    NoMinorization,
    ParamError,
    RTooSmall,
    SupportMismatch,
    Unreachable,
)

#: default level-set radius as a multiple of 2b / (1 - gamma_t)
DEFAULT_R_FACTOR = 1.05


@dataclass(frozen=True, eq=False)
class AltCertificate:
    S: Tuple[int, ...]
    gamma_tilde: float
    b: float
    alpha_tilde: float
    nu_tilde: Measure
    valid: bool
    slack: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class AveragingCertificate:
    n_star: int
    ell: int
    alpha_hat: float
    nu: Measure
    N: int
    R: float
    remark_bound: float
    # diagnostics for the intermediate lower bounds of the construction
    lower_bound2_min: float = float("nan")
    alpha_m: float = float("nan")


@dataclass(frozen=True, eq=False)
class AveragedCertification:
    """Plain drift + minorization + contraction certified for the averaged kernel."""

    averaging: AveragingCertificate
    N: int
    Q: Kernel
    gamma_Q: float
    drift: DriftCertificate
    minorization: MinorizationCertificate
    theorem_certificate: ContractionCertificate
    certificate: ContractionCertificate
    check: ContractionCheck


def _strict_weight(V, n: int) -> LyapunovWeight:
    if isinstance(V, LyapunovWeight):
        V = V.values
    v = np.asarray(V, dtype=float)
    if v.shape != (n,):
        raise ParamError(f"V has shape {v.shape}, expected ({n},)")
    return LyapunovWeight(v, strict=True)


def _indicator(S: Iterable[int], n: int) -> Tuple[Tuple[int, ...], np.ndarray]:
    S = tuple(sorted({int(s) for s in S}))
    if not S:
        raise ParamError("S must contain at least one state")
    if S[0] < 0 or S[-1] >= n:
        raise ParamError(f"S indices must lie in 0..{n - 1}, got {S}")
    ind = np.zeros(n)
    ind[list(S)] = 1.0
    return S, ind


def check_alt(k: Kernel, V, S: Iterable[int], gamma_tilde: float, b: float) -> AltCertificate:
    """Check the indicator drift on every state and extract the minorization over ``S``."""
    V = _strict_weight(V, k.n)
    if not 0.0 < gamma_tilde < 1.0:
        raise ParamError(f"gamma_tilde must lie in (0, 1), got {gamma_tilde!r}")
    if not b >= 0:
        raise ParamError(f"b must be >= 0, got {b!r}")
    S, ind = _indicator(S, k.n)
    slack = gamma_tilde * V.values + b * ind - k.rows @ V.values
    slack.setflags(write=False)
    alpha_t, m = minorize_rows(k.rows, S)
    if not alpha_t > 0:
        raise NoMinorization(f"rows in S = {S} have disjoint supports")
    nu_t = Measure(m / m.sum())
    return AltCertificate(
        S, float(gamma_tilde), float(b), alpha_t, nu_t, bool(slack.min() >= -SLACK_TOL), slack
    )


def derive_plain_from_alt(cert: AltCertificate) -> Tuple[float, float]:
    """The indicator drift implies the plain drift with ``(gamma, K) = (gamma_t, b)``."""
    if not cert.valid:
        raise CertError("alternative certificate is not valid")
    return cert.gamma_tilde, cert.b


def default_R(cert: AltCertificate) -> float:
    return DEFAULT_R_FACTOR * 2.0 * cert.b / (1.0 - cert.gamma_tilde)


def remark_N_bound(gamma_tilde: float, b: float, nu_V: float) -> float:
    """``1 + log(2b nu_t(V) / (1 - gamma_t)) / log(gamma_t)``; advisory only, may be negative."""
    arg = 2.0 * b / (1.0 - gamma_tilde) * nu_V
    if arg <= 0:
        return math.inf
    return 1.0 + math.log(arg) / math.log(gamma_tilde)


def compute_averaging_N(
    k: Kernel, V, cert: AltCertificate, R: Optional[float] = None, n_max: Optional[int] = None
) -> AveragingCertificate:
    """Constructive averaging depth ``N = n_star + 1 + ell``."""
    if not cert.valid:
        raise CertError("alternative certificate is not valid")
    V = _strict_weight(V, k.n)
    g, b = cert.gamma_tilde, cert.b
    threshold = 2.0 * b / (1.0 - g)
    R = default_R(cert) if R is None else float(R)
    if not (R > 0 and R >= (1.0 + STRICT_MARGIN) * threshold):
        raise RTooSmall(f"R = {R!r} does not exceed 2b/(1-gamma_t) = {threshold!r}")
    P = k.rows
    S = list(cert.S)
    nu_t = cert.nu_tilde.weights

    n_star = 0
    while 0.5 * g ** (-n_star - 1) < R:
        n_star += 1

    if n_max is None:
        n_max = 10 * k.n
    vec = nu_t.copy()
    pushes = [vec]
    ell = None
    for trial in range(1, n_max + 1):
        if vec[S].sum() > 0:
            ell = trial
            break
        vec = vec @ P
        pushes.append(vec)
    if ell is None:
        raise Unreachable(f"S = {tuple(S)} not charged by P^j nu_t for any j < {n_max}")
    pushes = pushes[:ell]
    pushed = pushes[-1] @ P  # P^ell nu_t
    support = nu_t > 0
    alpha_hat = float(np.min(pushed[support] / nu_t[support]))
    if not alpha_hat > 0:
        raise SupportMismatch("P^ell nu_t does not charge the whole support of nu_t")
    nu = Measure(np.mean(pushes, axis=0))

    lb2 = _lower_bound2_min(P, V.values, S, g, n_star)
    alpha_m = _alpha_m(P, S, nu.weights, n_star + 1, ell)
    return AveragingCertificate(
        n_star=n_star,
        ell=ell,
        alpha_hat=min(1.0, alpha_hat),
        nu=nu,
        N=n_star + 1 + ell,
        R=R,
        remark_bound=remark_N_bound(g, b, float(nu_t @ V.values)),
        lower_bound2_min=lb2,
        alpha_m=alpha_m,
    )


def lower_bound2_terms(P: np.ndarray, S, gamma_tilde: float, n: int) -> np.ndarray:
    """``sum_{k=0}^{n} gamma_t^k (P^(n-k) 1_S)(x)`` for every state ``x``."""
    ind = np.zeros(P.shape[0])
    ind[list(S)] = 1.0
    hits = [ind]  # hits[j] = P^j 1_S
    for _ in range(n):
        hits.append(P @ hits[-1])
    return sum(gamma_tilde ** j * hits[n - j] for j in range(n + 1))


def _lower_bound2_min(P, V, S, g, n) -> float:
    mask = V <= 0.5 * g ** (-n - 1)
    if not mask.any():
        return math.inf
    return float(lower_bound2_terms(P, S, g, n)[mask].min())


def _alpha_m(P, S, nu, m, ell) -> float:
    """Largest ``a`` with ``min_{x in S} sum_{k=m}^{m+ell} P^k(x, .) >= a nu``."""
    rows = np.eye(P.shape[0])[list(S)]
    for _ in range(m):
        rows = rows @ P
    acc = np.zeros_like(rows)
    for _ in range(ell + 1):
        acc += rows
        rows = rows @ P
    low = acc.min(axis=0)
    support = nu > 0
    return float(np.min(low[support] / nu[support]))


def averaged_drift_rate(gamma_tilde: float, N: int) -> float:
    """``(1/(N+1)) sum_{k=0}^{N} gamma_t^k``, the drift rate inherited by ``Q``."""
    return float(np.mean(gamma_tilde ** np.arange(N + 1)))


def certify_averaged(
    k: Kernel,
    V,
    cert: AltCertificate,
    R: Optional[float] = None,
    N: Optional[int] = None,
    n_max: Optional[int] = None,
) -> AveragedCertification:
    """Certify drift, minorization and contraction for the averaged kernel ``Q``.

    ``N`` defaults to the constructive depth; passing a smaller ``N`` is
    allowed but carries no guarantee.
    """
    avg = compute_averaging_N(k, V, cert, R, n_max)
    V = _strict_weight(V, k.n)
    R = avg.R
    N = avg.N if N is None else int(N)
    # the average is only defined for N > 0; N = 0 means "no averaging", Q = P
    Q = cesaro_average(k, N) if N > 0 else k
    minor = extract_minorization(Q, V, R)
    gamma_Q = averaged_drift_rate(cert.gamma_tilde, N) if N > 0 else cert.gamma_tilde
    K_Q = fit_K(Q, V, gamma_Q)
    drift = check_drift(Q, V, gamma_Q, K_Q)
    if not (drift.valid and minor.residual_ok):
        raise CertError("averaged kernel fails drift or minorization")
    theorem = certify_fixed(Q, V, gamma_Q, R, K=K_Q)
    try:
        tuned = optimize_constants(Q, V, extra_gammas=(gamma_Q,))
    except NoFeasiblePoint:
        tuned = theorem
    best = tuned if tuned.alpha_bar < theorem.alpha_bar else theorem
    check = verify_pointwise_contraction(Q, V, best)
    return AveragedCertification(
        averaging=avg,
        N=N,
        Q=Q,
        gamma_Q=gamma_Q,
        drift=drift,
        minorization=minor,
        theorem_certificate=theorem,
        certificate=best,
        check=check,
    )
