"""Weighted norms and distances indexed by a scale ``beta > 0``.

With weights ``w_beta(x) = 1 + beta * V(x)``:

* ``||phi||_beta = max_x |phi(x)| / w_beta(x)``  (``beta = 1`` is the reference norm),
* ``d_beta(x, y) = w_beta(x) + w_beta(y)`` for ``x != y`` and 0 on the diagonal,
* the Lipschitz seminorm of ``phi`` with respect to ``d_beta``,
* ``rho_beta(mu1, mu2) = sum_x w_beta(x) |mu1(x) - mu2(x)|``.

Shifting a function by a constant does not change its Lipschitz seminorm, and
the shift returned by :func:`optimal_shift` brings ``||phi + c||_beta`` down to
the seminorm. Consequently the dual of ``||.||_beta`` and the Kantorovich dual
of ``d_beta`` agree on probability measures.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .core import ArrayLike, LyapunovWeight, Measure, _vector, as_weight
from .errors import DimensionError, MassMismatch, ParamError

_BLOCK = 1024


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0:
        raise ParamError(f"beta must be finite and > 0, got {beta!r}")
    return beta


def weights(V: Union[LyapunovWeight, ArrayLike], beta: float) -> np.ndarray:
    """The vector ``1 + beta * V``."""
    return 1.0 + check_beta(beta) * as_weight(V).values


def weighted_sup_norm(phi: ArrayLike, V, beta: float = 1.0) -> float:
    V = as_weight(V)
    phi = _vector(phi, V.n, "phi")
    return float(np.max(np.abs(phi) / weights(V, beta)))


def dbeta_point(x: int, y: int, V, beta: float) -> float:
    """Point metric: 0 if ``x == y`` else ``2 + beta V(x) + beta V(y)``."""
    V = as_weight(V)
    for i in (x, y):
        if not 0 <= i < V.n:
            raise DimensionError(f"state {i} outside 0..{V.n - 1}")
    if x == y:
        return 0.0
    beta = check_beta(beta)
    # same association as rho_beta on Diracs, so the two agree bit-for-bit
    return float((1.0 + beta * V.values[x]) + (1.0 + beta * V.values[y]))


def dbeta_matrix(V, beta: float) -> np.ndarray:
    w = weights(V, beta)
    d = w[:, None] + w[None, :]
    np.fill_diagonal(d, 0.0)
    return d


def lipschitz_seminorm(phi: ArrayLike, V, beta: float) -> float:
    """``max_{x != y} |phi(x) - phi(y)| / d_beta(x, y)`` by exhaustive enumeration."""
    V = as_weight(V)
    phi = _vector(phi, V.n, "phi")
    w = weights(V, beta)
    n = V.n
    best = 0.0
    for start in range(0, n, _BLOCK):
        sl = slice(start, min(start + _BLOCK, n))
        num = np.abs(phi[sl, None] - phi[None, :])
        ratio = num / (w[sl, None] + w[None, :])
        # diagonal numerators are zero already
        best = max(best, float(ratio.max()))
    return best


def optimal_shift(phi: ArrayLike, V, beta: float) -> float:
    """The constant ``c = min_x (1 + beta V(x) - phi(x))``.

    If ``lipschitz_seminorm(phi) <= 1`` then ``|phi(x) + c| <= 1 + beta V(x)``
    for every ``x``. Use :func:`best_shift` for functions of arbitrary scale.
    """
    V = as_weight(V)
    phi = _vector(phi, V.n, "phi")
    return float(np.min(weights(V, beta) - phi))


def best_shift(phi: ArrayLike, V, beta: float) -> float:
    """Shift ``c`` with ``||phi + c||_beta == lipschitz_seminorm(phi)``.

    This is :func:`optimal_shift` applied to ``phi / s`` and rescaled by the
    seminorm ``s``; for constant ``phi`` it returns ``-phi``.
    """
    V = as_weight(V)
    phi = _vector(phi, V.n, "phi")
    s = lipschitz_seminorm(phi, V, beta)
    return float(np.min(s * weights(V, beta) - phi))


def _signed_difference(mu1, mu2, n=None) -> np.ndarray:
    a = np.asarray(mu1.weights if isinstance(mu1, Measure) else mu1, dtype=float)
    b = np.asarray(mu2.weights if isinstance(mu2, Measure) else mu2, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionError(f"measures have shapes {a.shape} and {b.shape}")
    if n is not None and a.size != n:
        raise DimensionError(f"measures have {a.size} entries, expected {n}")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, abs(a.sum())):
        raise MassMismatch(f"total masses differ: {a.sum()!r} vs {b.sum()!r}")
    return a - b


def rho_beta(mu1, mu2, V, beta: float) -> float:
    """Weighted total variation ``sum_x (1 + beta V(x)) |mu1(x) - mu2(x)|``."""
    V = as_weight(V)
    diff = _signed_difference(mu1, mu2, V.n)
    return float(np.sum(weights(V, beta) * np.abs(diff)))


def rho_beta_dual(mu1, mu2, V, beta: float) -> float:
    """``sup { (mu1 - mu2)(phi) : ||phi||_beta <= 1 }`` via the extremal test function.

    The supremum is attained at ``phi = sign(mu1 - mu2) * (1 + beta V)``.
    """
    V = as_weight(V)
    diff = _signed_difference(mu1, mu2, V.n)
    phi = np.sign(diff) * weights(V, beta)
    return float(np.sum(phi * diff))


def pairwise_rho(A: np.ndarray, B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Row-wise ``rho`` between stacked measures ``A[i]`` and ``B[i]`` with weights ``w``."""
    return np.abs(A - B) @ w
