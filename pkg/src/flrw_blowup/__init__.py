"""Blow-up exponents, lifespan bounds and simulations for

    u_tt - t^(-2 alpha) Lap u + (mu/t) u_t = |u_t|^p  or  |grad u|^p,

the reduced form of the semilinear wave equation on an FLRW background.
"""

from .params import (
    DomainError,
    FLRWParams,
    ModelParams,
    Nonlinearity,
    Regime,
    ValidationError,
    flrw_to_model,
    lightcone_radius,
    regime,
    scale_factor,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError", "FLRWParams", "ModelParams", "Nonlinearity", "Regime", "ValidationError",
    "flrw_to_model", "lightcone_radius", "regime", "scale_factor", "validate", "__version__",
]
