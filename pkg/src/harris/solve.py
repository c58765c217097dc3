"""Invariant measures: certified fixed-point iteration, exact solve, decay checks.

If one kernel step contracts ``rho_beta`` by ``alpha_bar < 1``, the orbit
``mu_n = P^n mu_0`` satisfies ``rho_beta(mu_{n+1}, mu_n) <= alpha_bar^n d_0``
with ``d_0 = rho_beta(mu_1, mu_0)``, hence

    rho_beta(mu_n, mu_star) <= alpha_bar^n d_0 / (1 - alpha_bar).

That geometric tail is the a-priori error reported by :func:`invariant_measure`.

The constant in the weighted-norm decay ``||P^n phi - mu_star(phi)|| <= C
alpha_bar^n ||phi - mu_star(phi)||`` (reference norm, ``beta = 1``) follows from
two facts. With ``psi = phi - mu_star(phi)``,
``|P^n psi(x)| <= ||psi||_beta rho_beta(P^n delta_x, mu_star) <= ||psi||_beta
alpha_bar^n (2 + beta V(x) + beta mu_star(V))``, and
``||psi||_beta <= max(1, 1/beta) ||psi||``. Dividing by ``1 + V(x)`` gives
``C = max(1, 1/beta) max_x (2 + beta V(x) + beta mu_star(V)) / (1 + V(x))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .certify import ContractionCertificate
from .core import Kernel, Measure, as_measure, as_weight
from .errors import CertError, ContractViolation, NonUniqueStationary, ParamError
from .metrics import rho_beta, weights

STEP_TOL = 1e-10
NULLSPACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConvergenceRun:
    iterates: int
    distances: np.ndarray
    certified_error: float
    mu_star: Measure
    mu_star_V: float
    alpha_bar: float
    beta: float
    #: a-priori bound on rho_beta(mu_n, mu_star) for n = 0..iterates
    bounds: np.ndarray = field(repr=False)
    path: Optional[np.ndarray] = field(default=None, repr=False)


def invariant_measure(
    k: Kernel,
    V,
    cert: ContractionCertificate,
    tol: float = 1e-10,
    mu0=None,
    keep_path: bool = False,
    max_iter: int = 1_000_000,
) -> ConvergenceRun:
    """Iterate ``mu <- P mu`` until the certified error drops below ``tol``."""
    if not cert.empirically_verified:
        raise CertError("certificate has not passed verify_pointwise_contraction")
    if not tol > 0:
        raise ParamError(f"tol must be > 0, got {tol!r}")
    V = as_weight(V, k.n)
    mu = as_measure(Measure.uniform(k.n) if mu0 is None else mu0, k.n).weights
    a = cert.alpha_bar
    w = weights(V, cert.beta)
    P = k.rows

    path = [mu] if keep_path else None
    nxt = mu @ P
    d0 = float(np.abs(nxt - mu) @ w)
    distances = [d0]
    mu = nxt
    if keep_path:
        path.append(mu)
    n = 1
    scale = d0 / (1.0 - a)
    bounds = [scale, a * scale]
    while a ** n * scale > tol:
        if n >= max_iter:
            raise ContractViolation(f"no certified convergence after {max_iter} steps")
        nxt = mu @ P
        d = float(np.abs(nxt - mu) @ w)
        if d > a * distances[-1] + STEP_TOL:
            raise ContractViolation(
                f"step {n}: distance {d!r} exceeds alpha_bar * previous = {a * distances[-1]!r}"
            )
        distances.append(d)
        mu = nxt
        n += 1
        bounds.append(a ** n * scale)
        if keep_path:
            path.append(mu)

    mu_star = Measure(mu)
    return ConvergenceRun(
        iterates=n,
        distances=np.asarray(distances),
        certified_error=a ** n * scale,
        mu_star=mu_star,
        mu_star_V=float(mu_star.weights @ V.values),
        alpha_bar=a,
        beta=cert.beta,
        bounds=np.asarray(bounds),
        path=np.asarray(path) if keep_path else None,
    )


def exact_invariant(k: Kernel) -> Measure:
    """Stationary distribution from the null space of ``P^T - I``.

    Raises :class:`NonUniqueStationary` if that null space has dimension > 1
    (singular values below ``1e-8``).
    """
    A = k.rows.T - np.eye(k.n)
    _, s, vt = scipy.linalg.svd(A)
    null_dim = int(np.sum(s < NULLSPACE_TOL))
    if null_dim != 1:
        raise NonUniqueStationary(f"fixed-point space has dimension {null_dim}")
    v = vt[-1]
    v = v / v.sum()
    v = np.where(v < 0, 0.0, v)
    pi = v / v.sum()
    # one refinement step on the normalised system
    M = np.vstack([A, np.ones(k.n)])
    rhs = np.zeros(k.n + 1)
    rhs[-1] = 1.0
    corr, *_ = np.linalg.lstsq(M, rhs - M @ pi, rcond=None)
    refined = pi + corr
    if np.all(refined >= 0):
        pi = refined
    return Measure(pi / pi.sum())


def decay_constant(cert: ContractionCertificate, V, mu_star) -> float:
    """Explicit ``C`` for the reference-norm decay (derivation in the module docstring)."""
    V = as_weight(V)
    mu_star = as_measure(mu_star, V.n)
    beta = cert.beta
    mean_V = float(mu_star.weights @ V.values)
    per_state = (2.0 + beta * V.values + beta * mean_V) / (1.0 + V.values)
    return float(max(1.0, 1.0 / beta) * per_state.max())


def verify_decay(
    k: Kernel,
    V,
    cert: ContractionCertificate,
    mu_star,
    n_phi: int = 100,
    n_max: int = 50,
    seed: int = 0,
    tol: float = 1e-9,
) -> Tuple[bool, float]:
    """Check ``||P^n phi - mu_star(phi)|| <= C alpha_bar^n ||phi - mu_star(phi)||``.

    Random test functions mix bounded noise with multiples of ``V``. Returns
    ``(passed, worst ratio of lhs to rhs)``.
    """
    V = as_weight(V, k.n)
    mu_star = as_measure(mu_star, k.n)
    C = decay_constant(cert, V, mu_star)
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=(k.n, n_phi)) + rng.normal(size=n_phi) * V.values[:, None]
    psi = phi - mu_star.weights @ phi
    w = 1.0 + V.values
    rhs0 = np.max(np.abs(psi) / w[:, None], axis=0)
    worst, ok = 0.0, True
    cur = psi
    for n in range(n_max + 1):
        lhs = np.max(np.abs(cur) / w[:, None], axis=0)
        rhs = C * cert.alpha_bar ** n * rhs0
        ok &= bool(np.all(lhs <= rhs + tol))
        worst = max(worst, float(np.max(lhs / np.maximum(rhs, 1e-300))))
        cur = k.rows @ cur
    return ok, worst


def convergence_curve(
    k: Kernel, V, beta: float, mu0, n_max: int, mu_star: Optional[Measure] = None
) -> List[Tuple[int, float]]:
    """``[(n, rho_beta(P^n mu0, mu_star)) for n = 0..n_max]``."""
    V = as_weight(V, k.n)
    mu_star = exact_invariant(k) if mu_star is None else as_measure(mu_star, k.n)
    mu = as_measure(mu0, k.n).weights
    out = []
    for n in range(int(n_max) + 1):
        out.append((n, rho_beta(mu, mu_star.weights, V, beta)))
        mu = mu @ k.rows
    return out
