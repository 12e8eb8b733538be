"""Fractional reaction-diffusion on R^d.

Space is discretised with a mapped-Chebyshev spectral-Galerkin basis that
diagonalises (-Delta)^s; time is advanced with Krogstad's ETDRK4-B scheme.
"""

from .basis import BasisSpec, Eigenbasis, Transform, build_grid, build_stiffness, eigendecompose
from .integrator import BlowUpError, StepperState, etdrk4_step, integrate, phi, stability_boundary
from .operators import OperatorKind, OperatorSpec, build_symbol, scalar_dt_identity
from .reactions import ModelKind, ModelSpec, fractional_gaussian, kummer_1f1, reaction_eval
from .solver import Discretization, make_stepper

__version__ = "0.1.0"

__all__ = [
    "BasisSpec", "Eigenbasis", "Transform", "build_grid", "build_stiffness", "eigendecompose",
    "BlowUpError", "StepperState", "etdrk4_step", "integrate", "phi", "stability_boundary",
    "OperatorKind", "OperatorSpec", "build_symbol", "scalar_dt_identity",
    "ModelKind", "ModelSpec", "fractional_gaussian", "kummer_1f1", "reaction_eval",
    "Discretization", "make_stepper",
]
