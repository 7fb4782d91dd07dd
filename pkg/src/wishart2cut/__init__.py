"""Two-eigenvalue complex Wishart ensembles: limiting law, edge and bulk universality checks."""

__version__ = "0.1.0"

from .model import FiniteSize, ModelParams, ParameterError, effective_params, finite_size, validate  # noqa: E402
from .spectral_curve import (  # noqa: E402
    NearTransitionError,
    Regime,
    classify,
    quartic_roots,
    theta,
)

__all__ = [
    "FiniteSize", "ModelParams", "ParameterError", "effective_params", "finite_size", "validate",
    "NearTransitionError", "Regime", "classify", "quartic_roots", "theta",
]
