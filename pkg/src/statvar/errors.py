"""Exception hierarchy shared across the package."""


class StatVarError(Exception):
    """Base class for all errors raised by this package."""


class NotSpd(StatVarError):
    """A matrix required to be symmetric positive definite is not."""


class NotStationary(StatVarError):
    """Autoregressive coefficients lie outside the stationary region."""


class NotInVm(StatVarError):
    """A matrix has a singular value at or above one."""


class NotOrthogonal(StatVarError):
    """A matrix required to be orthogonal is not, to tolerance."""


class SingularSystem(StatVarError):
    """A linear system arising inside a solver is singular."""


class OutOfBounds(StatVarError):
    """Structured-form parameters violate their singular-value bounds."""


class DimensionMismatch(StatVarError):
    """Inputs have inconsistent dimensions."""


class NonPositiveHyper(StatVarError):
    """A hyperparameter required to be positive is not."""


class InfiniteVariance(StatVarError):
    """Requested marginal moments do not exist for these hyperparameters."""


class NonFinite(StatVarError):
    """A quantity required to be finite evaluated to NaN or infinity."""


class AllDivergent(StatVarError):
    """Nearly all post-warmup HMC proposals diverged."""


class TooFewDraws(StatVarError):
    """Not enough chains or draws to compute a diagnostic."""


class TooFewSamples(StatVarError):
    """Not enough samples to evaluate a scoring rule."""


class ZeroDensity(StatVarError):
    """A predictive density underflowed to zero."""


class RankDeficientDesign(StatVarError):
    """A regression design matrix is rank deficient."""


class BadCsv(StatVarError):
    """A CSV file could not be parsed as numeric data with a header."""


class ConfigInvalid(StatVarError):
    """A run configuration is missing or inconsistent."""
