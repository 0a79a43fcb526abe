"""Lorentz-space mild solutions of the periodic incompressible Navier-Stokes equations.

Spectral field operations, a rearrangement-based Lorentz norm engine, heat and
Oseen kernels, exact-exponential Duhamel operators, the explicit constants of
the existence theory, a Picard solver with a blowup monitor, and regularity
diagnostics.
"""

from .constants import ConstantsTable, alpha_constant, beta_constant, eta_table, gamma_constant
from .duhamel import PathSpec, Trajectory, apply_heat, bilinear_B, duhamel_A, path_norm
from .errors import NSLorentzError, ValidationError
from .fields import Field, Grid, generate_initial_data, leray_project, taylor_green_field
from .lorentz import LorentzIndex, Rearrangement, lorentz_norm, lorentz_quasinorm
from .solver import SolveConfig, blowup_monitor, blowup_threshold, extend, picard_solve

__version__ = "0.1.0"

__all__ = [
    "ConstantsTable",
    "Field",
    "Grid",
    "LorentzIndex",
    "NSLorentzError",
    "PathSpec",
    "Rearrangement",
    "SolveConfig",
    "Trajectory",
    "ValidationError",
    "alpha_constant",
    "apply_heat",
    "beta_constant",
    "bilinear_B",
    "blowup_monitor",
    "blowup_threshold",
    "duhamel_A",
    "eta_table",
    "extend",
    "gamma_constant",
    "generate_initial_data",
    "leray_project",
    "lorentz_norm",
    "lorentz_quasinorm",
    "path_norm",
    "picard_solve",
    "taylor_green_field",
]
