"""Domain walls in a forced Landau-de Gennes film under a Gaussian beam."""

from .energy import EnergyBreakdown, energy_identity_residual, energy_renormalized, energy_total
from .fields import Field, Profile1D
from .model import (
    ConfigError, GridSpec, ModelConfig, TabulatedProfile, ToleranceSet, config_from_dict, config_to_dict,
    validate_hypotheses,
)
from .painleve import hastings_mcleod, painleve_solve_alpha
from .solver import NoConvergenceError, SolveResult, gradient_flow_run, minimize_multistart
from .thresholds import ThresholdReport, threshold_report
from .walls import ZeroSet, extract_zero_set, wall_deviation

__all__ = [
    "ConfigError", "EnergyBreakdown", "Field", "GridSpec", "ModelConfig", "NoConvergenceError", "Profile1D",
    "SolveResult", "TabulatedProfile", "ThresholdReport", "ToleranceSet", "ZeroSet", "config_from_dict",
    "config_to_dict", "energy_identity_residual", "energy_renormalized", "energy_total", "extract_zero_set",
    "gradient_flow_run", "hastings_mcleod", "minimize_multistart", "painleve_solve_alpha", "threshold_report",
    "validate_hypotheses", "wall_deviation",
]
