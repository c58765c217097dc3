"""Certified geometric ergodicity for finite Markov kernels.

Checks a Lyapunov drift condition and a minorization on a level set, turns
them into an explicit contraction rate in a weighted total-variation metric,
and uses that rate to compute invariant measures with a certified error.
"""

__version__ = "0.1.0"

from .core import (
    Kernel,
    LyapunovWeight,
    Measure,
    StateSpace,
    apply_to_function,
    apply_to_measure,
    cesaro_average,
    power,
)
from .metrics import (
    best_shift,
    dbeta_point,
    lipschitz_seminorm,
    optimal_shift,
    rho_beta,
    rho_beta_dual,
    weighted_sup_norm,
)
from .certify import (
    check_drift,
    contraction_constants,
    extract_minorization,
    fit_K,
    optimize_constants,
    verify_pointwise_contraction,
)
from .harris_alt import check_alt, certify_averaged, compute_averaging_N, derive_plain_from_alt
from .solve import convergence_curve, decay_constant, exact_invariant, invariant_measure

__all__ = [
    "Kernel", "LyapunovWeight", "Measure", "StateSpace",
    "apply_to_function", "apply_to_measure", "cesaro_average", "power",
    "best_shift", "dbeta_point", "lipschitz_seminorm", "optimal_shift",
    "rho_beta", "rho_beta_dual", "weighted_sup_norm",
    "check_drift", "contraction_constants", "extract_minorization", "fit_K",
    "optimize_constants", "verify_pointwise_contraction",
    "check_alt", "certify_averaged", "compute_averaging_N", "derive_plain_from_alt",
    "convergence_curve", "decay_constant", "exact_invariant", "invariant_measure",
]
