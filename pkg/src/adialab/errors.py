"""Exception types shared across the package."""


class AdialabError(Exception):
    """Base class for every error this package raises on purpose."""


class NotHermitian(AdialabError):
    """A matrix that must be Hermitian is not (beyond tolerance)."""


class NotNormalized(AdialabError):
    """A state vector that must have unit norm does not."""


class NumericalFailure(AdialabError):
    """A dense linear-algebra routine failed to converge."""


class OutOfRange(AdialabError):
    """A path parameter or index lies outside its admissible range."""


class InterpolationGap(AdialabError):
    """A tabulated schedule's sample grid does not cover [0, 1] properly."""


class GapCollapse(AdialabError):
    """The tracked spectral gap fell below the resolvable threshold."""


class ContinuityLoss(AdialabError):
    """Branch continuation lost the eigenvector (overlap below threshold)."""


class ConfigInvalid(AdialabError):
    """An experiment or propagation configuration is inconsistent."""


class DomainError(AdialabError):
    """A bound formula was evaluated outside its domain."""
