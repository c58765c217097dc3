"""Built-in chains with known behaviour, for tests and CLI demos."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np
from scipy.special import ndtr

from .core import Kernel, LyapunovWeight, StateSpace, cesaro_average
from .errors import ParamError


@dataclass(frozen=True, eq=False)
class NamedExample:
    name: str
    kernel: Kernel
    V: LyapunovWeight
    known: Dict[str, object] = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if self.V.n != self.kernel.n:
            raise ParamError(f"{self.name}: V has {self.V.n} entries for {self.kernel.n} states")


def flip_chain() -> NamedExample:
    """Deterministic two-state flip ``P(x, .) = delta_{1-x}`` with ``V(x) = 1 + x``.

    It satisfies the indicator drift with ``S = {0}``, ``gamma_t = 1/2``,
    ``b = 3/2`` and the minorization on ``S`` with ``alpha_t = 1``,
    ``nu_t = delta_1``, yet has spectrum ``{-1, 1}``.
    """
    return NamedExample(
        "flip",
        Kernel(np.array([[0.0, 1.0], [1.0, 0.0]])),
        LyapunovWeight(np.array([1.0, 2.0]), strict=True),
        known={"S": (0,), "gamma_tilde": 0.5, "b": 1.5, "alpha_tilde": 1.0, "nu_tilde": (0.0, 1.0)},
        description="period-2 flip chain; no spectral gap",
    )


def averaged_flip_chain(N: int = 6) -> NamedExample:
    base = flip_chain()
    return NamedExample(
        "avg-flip",
        cesaro_average(base.kernel, N),
        base.V,
        known={"N": N},
        description=f"Cesaro average of the flip chain over P^0..P^{N}",
    )


def reflected_random_walk(size: int, p: float) -> NamedExample:
    """Walk on ``{0, ..., size-1}`` stepping up w.p. ``p``, down w.p. ``1 - p``.

    Moves that would leave the range are replaced by holding. ``V(x) = x``.
    """
    if int(size) != size or size < 3:
        raise ParamError(f"size must be an integer >= 3, got {size!r}")
    if not 0.0 < p < 0.5:
        raise ParamError(f"p must lie in (0, 1/2), got {p!r}")
    P = np.zeros((size, size))
    for x in range(size):
        P[x, min(x + 1, size - 1)] += p
        P[x, max(x - 1, 0)] += 1.0 - p
    return NamedExample(
        "walk",
        Kernel(P),
        LyapunovWeight(np.arange(size, dtype=float)),
        known={"p": p},
        description=f"downward-biased reflected walk, {size} states, p={p:g}",
    )


def _cell_masses(mean: float, sigma: float, edges: np.ndarray) -> np.ndarray:
    lo = (edges[:-1] - mean) / sigma
    hi = (edges[1:] - mean) / sigma
    # upper tail through the survival function to avoid cancellation
    return np.where(lo > 0, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))


def discretized_ar1(a: float, sigma: float, grid_min: float, grid_max: float, n: int) -> NamedExample:
    """Cell discretisation of ``X' = a X + sigma xi`` on ``n`` equal cells.

    Row ``i`` is the Gaussian law of ``a x_i + sigma xi`` (``x_i`` the cell
    midpoint) integrated over each cell; mass beyond either end of the grid is
    lumped into the corresponding boundary cell. ``V(x) = 1 + x^2``.
    """
    if not abs(a) < 1:
        raise ParamError(f"|a| < 1 required, got {a!r}")
    if not sigma > 0:
        raise ParamError(f"sigma must be > 0, got {sigma!r}")
    if int(n) != n or n < 10:
        raise ParamError(f"n must be an integer >= 10, got {n!r}")
    if not grid_max > grid_min:
        raise ParamError("grid_max must exceed grid_min")
    h = (grid_max - grid_min) / n
    x = grid_min + h * (np.arange(n) + 0.5)
    edges = grid_min + h * np.arange(n + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    P = np.vstack([_cell_masses(a * xi, sigma, edges) for xi in x])
    labels = tuple(f"{xi:.6g}" for xi in x)
    return NamedExample(
        "ar1",
        Kernel(P, StateSpace(n, labels)),
        LyapunovWeight(1.0 + x ** 2),
        known={"a": a, "sigma": sigma, "grid": (grid_min, grid_max), "midpoints": x},
        description=f"AR(1) a={a:g}, sigma={sigma:g} on [{grid_min:g}, {grid_max:g}] with {n} cells",
    )


def iid_chain(row=(0.3, 0.7), V=(1.0, 2.0)) -> NamedExample:
    """Every row equal: a Doeblin chain with ``alpha = 1``."""
    row = np.asarray(row, dtype=float)
    return NamedExample(
        "iid",
        Kernel(np.tile(row, (row.size, 1))),
        LyapunovWeight(np.asarray(V, dtype=float)),
        description="independent draws; rows identical",
    )


DEMOS: Dict[str, Callable[[], NamedExample]] = {
    "flip": flip_chain,
    "avg-flip": averaged_flip_chain,
    "walk": lambda: reflected_random_walk(5, 0.1),
    "ar1": lambda: discretized_ar1(0.5, 1.0, -6.0, 6.0, 61),
    "iid": iid_chain,
}


def get_demo(name: str) -> NamedExample:
    try:
        return DEMOS[name]()
    except KeyError:
        raise ParamError(f"unknown demo {name!r}; choose from {', '.join(sorted(DEMOS))}") from None


def all_examples() -> Dict[str, NamedExample]:
    return {name: build() for name, build in DEMOS.items()}


