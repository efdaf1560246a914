"""adialab: a numerical lab for adiabatic quantum evolution.

Track spectral branches of slowly driven Hamiltonians, propagate the
Schrodinger equation with midpoint exponential steps, and check the
closed-form evolution-time bounds and every inequality feeding them at
desk scale.
"""

from . import bounds, matcore, propagator, schedule, spectral
from ._kern import backend as kernel_backend
from .errors import (
    AdialabError,
    ConfigInvalid,
    ContinuityLoss,
    DomainError,
    GapCollapse,
    InterpolationGap,
    NotHermitian,
    NotNormalized,
    NumericalFailure,
    OutOfRange,
)

__version__ = "0.1.0"

__all__ = [
    "AdialabError",
    "ConfigInvalid",
    "ContinuityLoss",
    "DomainError",
    "GapCollapse",
    "InterpolationGap",
    "NotHermitian",
    "NotNormalized",
    "NumericalFailure",
    "OutOfRange",
    "bounds",
    "kernel_backend",
    "matcore",
    "propagator",
    "schedule",
    "spectral",
    "__version__",
]
