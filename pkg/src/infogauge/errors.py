"""Exception and warning types shared across the package."""


class InfoGaugeError(Exception):
    """Base class for all package-specific errors."""


class AllZero(InfoGaugeError):
    """Density has zero total mass and cannot be normalized."""


class DomainTooSmall(InfoGaugeError):
    """Grid extent does not safely contain the target density."""


class DimensionMismatch(InfoGaugeError):
    """Inputs disagree on latent dimension or shape."""


class NonPositiveFisher(InfoGaugeError):
    """Fisher trace must be strictly positive."""


class BudgetExceeded(InfoGaugeError):
    """Requested accuracy is unreachable within the estimator budget."""


class CrossCheckFailed(InfoGaugeError):
    """Two independent numerical routes disagree beyond tolerance.

    Signals under-resolution of the grid rather than a physical effect.
    """


class FilterOrderRejected(InfoGaugeError):
    """Spectral filter order outside the supported range."""


class NotPositiveDefinite(InfoGaugeError):
    """Matrix expected to be symmetric positive definite is not."""


class ConfigInvalid(InfoGaugeError):
    """Experiment configuration failed validation."""


class ContractFailed(InfoGaugeError):
    """A declared numerical contract did not hold at run time."""


class PlateauWarning(UserWarning):
    """Flat region of tied energies collapsed to a single representative."""


class SeparationWarning(UserWarning):
    """Mixture modes closer than the well-separation threshold."""
