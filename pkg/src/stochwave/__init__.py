"""Stochastic Galerkin gPC / LDG solver for the wave equation with a random coefficient."""

__version__ = "0.1.0"

from .gpc import GpcBasis, build_index_set, eval_basis, gauss_rule, make_basis
from .coefficients import (CoefficientModel, ExactSolutionPreset, GalerkinCoeffField,
                           assemble_A, assemble_field, build_preset, perturbed)
from .mesh import LocalBasis, Mesh2D, build_mesh, evaluate_field, trace
from .ldg import (HOMOGENEOUS, BoundaryData, FluxConvention, compute_acceleration, compute_S,
                  project_initial_plain, project_initial_vplus)
from .leapfrog import (Discretization, EnergyRecord, InstabilityError, SolverState,
                       discrete_energy, initialize, step, suggest_dt)
from .diagnostics import (ErrorReport, EnergyTrace, build_case, convergence_order, error_norm,
                          gpc_sweep, long_time_error, perturbation_study, simulate)
from .config import RunConfig, load_config

__all__ = [
    "__version__", "GpcBasis", "build_index_set", "eval_basis", "gauss_rule", "make_basis",
    "CoefficientModel", "ExactSolutionPreset", "GalerkinCoeffField", "assemble_A",
    "assemble_field", "build_preset", "perturbed", "LocalBasis", "Mesh2D", "build_mesh",
    "evaluate_field", "trace", "HOMOGENEOUS", "BoundaryData", "FluxConvention",
    "compute_acceleration", "compute_S", "project_initial_plain", "project_initial_vplus",
    "Discretization", "EnergyRecord", "InstabilityError", "SolverState", "discrete_energy",
    "initialize", "step", "suggest_dt", "ErrorReport", "EnergyTrace", "build_case",
    "convergence_order", "error_norm", "gpc_sweep", "long_time_error", "perturbation_study",
    "simulate", "RunConfig", "load_config",
]
