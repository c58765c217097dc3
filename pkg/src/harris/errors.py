"""Exception hierarchy shared by all certification stages."""


class HarrisError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(HarrisError, ValueError):
    """Vector or matrix shapes do not agree with the state space."""


class ParamError(HarrisError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class NotStochastic(ParamError):
    """Matrix rows or measure weights are negative or do not sum to one."""


class MassMismatch(ParamError):
    """Signed measures of unequal total mass were compared."""


class RTooSmall(ParamError):
    """The level-set radius does not exceed ``2K / (1 - gamma)``."""


class EmptyLevelSet(HarrisError):
    """The level set ``{V <= R}`` contains no state."""


class NoMinorization(HarrisError):
    """Rows over the candidate set share no common mass (alpha = 0)."""


class NoFeasiblePoint(HarrisError):
    """No tuning grid cell yields a valid contraction certificate."""


class CertError(HarrisError):
    """A certificate is invalid or unverified for the requested use."""


class ContractViolation(HarrisError):
    """Observed step distances contradict the certified contraction rate."""


class NonUniqueStationary(HarrisError):
    """The kernel has more than one stationary distribution."""


class Unreachable(HarrisError):
    """The set S is never reached from the minorizing measure."""


class SupportMismatch(HarrisError):
    """``P^ell nu`` does not dominate a positive multiple of ``nu``."""
