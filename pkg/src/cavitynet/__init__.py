"""Cavity-mediated heralded entanglement: transfer dynamics, Bell protocol,
ion-chain thermal motion and architecture-level models."""

__version__ = "0.1.0"

from .errors import (
    BoundarySolutionError,
    ConfigError,
    IntegrationError,
    NumericError,
)

__all__ = [
    "__version__",
    "BoundarySolutionError",
    "ConfigError",
    "IntegrationError",
    "NumericError",
]
