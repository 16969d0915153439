"""Inextensible cantilevered beams and plates: kinematics, energies, residuals, dynamics and statics."""

from .core import (ConfigError, ContinuationStall, FieldState, InextError, ModelSpec, MultiplierField,
                   NewtonDivergence, ProjectionFailure, SlopeTooLarge, UnsupportedMode, Variant, make_model)
from .dynamics import SemiDiscreteSystem, semidiscretize, simulate, step
from .statics import LoadSpec, linear_modes, solve_static

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ContinuationStall", "FieldState", "InextError", "LoadSpec", "ModelSpec",
    "MultiplierField", "NewtonDivergence", "ProjectionFailure", "SemiDiscreteSystem", "SlopeTooLarge",
    "UnsupportedMode", "Variant", "linear_modes", "make_model", "semidiscretize", "simulate",
    "solve_static", "step",
]
