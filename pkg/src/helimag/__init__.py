"""Landau-Lifshitz-Gilbert dynamics with DMI under chiral boundary conditions.

Discrete helical derivative operators on cell-centered box grids, the
regularized evolution systems built on them, a spectral (eigenbasis) solution
path, and verifiers for the energy identities, maximum principle and weak
formulation residuals the dynamics satisfy.
"""

from .grid import Grid, GridSpec, make_grid, inner_product, norms
from .fields import FieldSpec, sample
from .operators import HelicalOperators, skew_matrices
from .energy import MaterialParams, EnergyBreakdown, energy_breakdown, helical_energy
from .dynamics import SystemKind, StepperConfig, simulate, rhs, j_map
from .galerkin import EigenBasis, assemble_operator, eigen_basis

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "GridSpec",
    "make_grid",
    "inner_product",
    "norms",
    "FieldSpec",
    "sample",
    "HelicalOperators",
    "skew_matrices",
    "MaterialParams",
    "EnergyBreakdown",
    "energy_breakdown",
    "helical_energy",
    "SystemKind",
    "StepperConfig",
    "simulate",
    "rhs",
    "j_map",
    "EigenBasis",
    "assemble_operator",
    "eigen_basis",
    "__version__",
]
