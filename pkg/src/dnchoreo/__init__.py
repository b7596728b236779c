"""Spectral solver and verification oracles for D_n-equivariant n-body choreographies."""

from .dynamics import PhysicalParams, apply_N, build_configuration, physical_residual
from .solver import (
    SolverConfig,
    SolveReport,
    homotopy_continuation,
    initial_guess,
    newton_solve,
)
from .spectral import FourierCurve, apply_K, apply_L
from .symmetry import SymmetrySpec, project_symmetry, winding_number
from .verify import ode_oracle, verify_solution

__all__ = [
    "FourierCurve",
    "PhysicalParams",
    "SolveReport",
    "SolverConfig",
    "SymmetrySpec",
    "apply_K",
    "apply_L",
    "apply_N",
    "build_configuration",
    "homotopy_continuation",
    "initial_guess",
    "newton_solve",
    "ode_oracle",
    "physical_residual",
    "project_symmetry",
    "verify_solution",
    "winding_number",
]

__version__ = "0.1.0"
