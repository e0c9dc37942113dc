"""Geometric multigrid for elliptic problems on level-set domains embedded in
a uniform Cartesian box, with ghost-point boundary rows whose relaxation
parameter is tuned per point by boundary-mode Fourier analysis."""

from .blfa import BlfaQuery, dtau_opt, symbol_p
from .cases import REGISTRY, build_case
from .geometry import UniformGrid, classify
from .kinds import BC_DIRICHLET, BC_NEUMANN, PDE_POISSON, PDE_REACTION
from .operators import ProblemSpec, assemble_system
from .smoothing import SmootherConfig
from .solver import CycleConfig, MultigridSolver, build_solver, measure_rho
from .spectrum import boundary_spectrum
from .transfer import build_hierarchy

__version__ = "0.1.0"

__all__ = [
    "BC_DIRICHLET",
    "BC_NEUMANN",
    "BlfaQuery",
    "CycleConfig",
    "MultigridSolver",
    "PDE_POISSON",
    "PDE_REACTION",
    "ProblemSpec",
    "REGISTRY",
    "SmootherConfig",
    "UniformGrid",
    "assemble_system",
    "boundary_spectrum",
    "build_case",
    "build_hierarchy",
    "build_solver",
    "classify",
    "dtau_opt",
    "measure_rho",
    "symbol_p",
]
