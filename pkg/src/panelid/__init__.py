"""Global identification, simulation and quasi-ML estimation for dynamic
panel models with interactive effects."""

from .model_core import (
    Normalization,
    NotPositiveDefiniteError,
    Theta,
    Variant,
    build_gamma,
    build_L,
    build_omega,
    build_sigma,
    make_theta,
    random_theta,
    validate_normalization,
)
from .poly_minors import AlphaPoly, ExclusionMinor, det_minor_poly, enumerate_minors, jtilde_poly

__version__ = "0.1.0"

__all__ = [
    "AlphaPoly",
    "ExclusionMinor",
    "Normalization",
    "NotPositiveDefiniteError",
    "Theta",
    "Variant",
    "build_L",
    "build_gamma",
    "build_omega",
    "build_sigma",
    "det_minor_poly",
    "enumerate_minors",
    "jtilde_poly",
    "make_theta",
    "random_theta",
    "validate_normalization",
]
