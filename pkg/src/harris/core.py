"""Finite state spaces, Lyapunov weights, probability measures and Markov kernels.

A kernel ``P`` acts on functions by ``(P phi)(x) = sum_y P(x, y) phi(y)`` and on
measures by ``(P mu)(y) = sum_x mu(x) P(x, y)``. All objects are immutable: the
underlying arrays are flagged read-only after validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, NotStochastic, ParamError

#: Tolerance on row / total mass before silent renormalisation is refused.
MASS_TOL = 1e-9

ArrayLike = Union[np.ndarray, Sequence[float]]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpace:
    """Indexed finite state space ``{0, ..., n-1}`` with optional labels."""

    n: int
    labels: Optional[tuple] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParamError(f"state space needs n >= 1, got {self.n!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.n:
                raise DimensionError(f"{len(labels)} labels for {self.n} states")
            object.__setattr__(self, "labels", labels)


@dataclass(frozen=True, eq=False)
class LyapunovWeight:
    """Nonnegative finite weight ``V`` over the states.

    ``strict=True`` enforces ``V >= 1`` (the range required by the drift
    condition with an indicator term).
    """

    values: np.ndarray
    strict: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise DimensionError("V must be a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise ParamError("V must be finite; restrict the state space to {V < inf} first")
        floor = 1.0 if self.strict else 0.0
        if np.any(v < floor):
            raise ParamError(f"V must be >= {floor:g} everywhere (min is {v.min():g})")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability vector; renormalised exactly when within ``MASS_TOL`` of 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DimensionError("measure weights must be a non-empty vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise NotStochastic("measure weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise NotStochastic(f"measure has mass {total!r}, expected 1")
        object.__setattr__(self, "weights", _frozen(w / total))

    @classmethod
    def delta(cls, n: int, i: int) -> "Measure":
        if not 0 <= i < n:
            raise DimensionError(f"state {i} outside 0..{n - 1}")
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n: int) -> "Measure":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.weights.size

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def integrate(self, phi: ArrayLike) -> float:
        """Return ``mu(phi) = sum_x mu(x) phi(x)``."""
        phi = _vector(phi, self.n, "phi")
        return float(self.weights @ phi)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic transition matrix ``P(x, y)``."""

    rows: np.ndarray
    space: Optional[StateSpace] = field(default=None, compare=False)

    def __post_init__(self):
        p = np.asarray(self.rows, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
            raise DimensionError(f"kernel must be a non-empty square matrix, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise NotStochastic("kernel entries must be finite")
        if np.any(p < 0):
            i, j = np.argwhere(p < 0)[0]
            raise NotStochastic(f"negative transition probability P[{i},{j}] = {p[i, j]!r}")
        sums = p.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > MASS_TOL)
        if bad.size:
            raise NotStochastic(f"row {bad[0]} sums to {sums[bad[0]]!r}")
        object.__setattr__(self, "rows", _frozen(p / sums[:, None]))
        if self.space is None:
            object.__setattr__(self, "space", StateSpace(p.shape[0]))
        elif self.space.n != p.shape[0]:
            raise DimensionError("state space size does not match kernel")

    @classmethod
    def identity(cls, n: int) -> "Kernel":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.rows, dtype=dtype)


def _vector(phi: ArrayLike, n: int, name: str = "vector") -> np.ndarray:
    v = np.asarray(phi, dtype=float)
    if v.ndim != 1 or v.size != n:
        raise DimensionError(f"{name} has shape {v.shape}, expected ({n},)")
    return v


def as_weight(V: Union[LyapunovWeight, ArrayLike], n: Optional[int] = None) -> LyapunovWeight:
    """Coerce ``V`` to a :class:`LyapunovWeight`, optionally checking its length."""
    if not isinstance(V, LyapunovWeight):
        V = LyapunovWeight(np.asarray(V, dtype=float))
    if n is not None and V.n != n:
        raise DimensionError(f"V has {V.n} entries, expected {n}")
    return V


def as_measure(mu: Union[Measure, ArrayLike], n: Optional[int] = None) -> Measure:
    if not isinstance(mu, Measure):
        mu = Measure(np.asarray(mu, dtype=float))
    if n is not None and mu.n != n:
        raise DimensionError(f"measure has {mu.n} entries, expected {n}")
    return mu


def apply_to_function(k: Kernel, phi: ArrayLike) -> np.ndarray:
    """Return ``P phi``, i.e. ``result[x] = sum_y P(x, y) phi(y)``."""
    phi = _vector(phi, k.n, "phi")
    if not np.all(np.isfinite(phi)):
        raise ParamError("phi must be finite")
    return k.rows @ phi


def apply_to_measure(k: Kernel, mu: Union[Measure, ArrayLike]) -> Measure:
    """Return ``P mu``, i.e. ``result[y] = sum_x mu(x) P(x, y)``."""
    mu = as_measure(mu, k.n)
    return Measure(mu.weights @ k.rows)


def power(k: Kernel, m: int) -> Kernel:
    """``m``-fold composition of ``k`` by repeated multiplication.

    ``power(k, 0)`` is the identity kernel.
    """
    if int(m) != m or m < 0:
        raise ParamError(f"exponent must be a nonnegative integer, got {m!r}")
    out = np.eye(k.n)
    for _ in range(int(m)):
        out = out @ k.rows
    return Kernel(out, k.space)


def cesaro_average(k: Kernel, N: int) -> Kernel:
    """Averaged kernel ``(1/(N+1)) * sum_{j=0}^{N} P^j``."""
    if int(N) != N or N < 0:
        raise ParamError(f"N must be a nonnegative integer, got {N!r}")
    term = np.eye(k.n)
    total = term.copy()
    for _ in range(int(N)):
        term = term @ k.rows
        total += term
    return Kernel(total / (N + 1), k.space)
