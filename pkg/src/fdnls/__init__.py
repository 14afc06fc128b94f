"""Spectral laboratory for the fractional discrete NLS on a periodic lattice."""

__version__ = "0.1.0"

from .core import (
    Field,
    Lattice,
    ModelParams,
    Representation,
    forward_dft,
    fractional_symbol,
    inverse_dft,
    lebesgue_norm_h,
    littlewood_paley_project,
    sobolev_norm_h,
    symbol_sigma_h,
)
from .dynamics import BlowUpError, SolverConfig, evolve_nonlinear
from .oracles import PlaneWaveSpec, predicted_error_coefficients
from .transfer import (
    ContinuumField,
    discretize_dh,
    interpolate_ph,
    interpolation_multiplier,
    l2_torus_error,
)

__all__ = [
    "BlowUpError",
    "ContinuumField",
    "Field",
    "Lattice",
    "ModelParams",
    "PlaneWaveSpec",
    "Representation",
    "SolverConfig",
    "discretize_dh",
    "evolve_nonlinear",
    "forward_dft",
    "fractional_symbol",
    "interpolate_ph",
    "interpolation_multiplier",
    "inverse_dft",
    "l2_torus_error",
    "lebesgue_norm_h",
    "littlewood_paley_project",
    "predicted_error_coefficients",
    "sobolev_norm_h",
    "symbol_sigma_h",
]
