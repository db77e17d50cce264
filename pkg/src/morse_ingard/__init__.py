"""Morse-Ingard thermoacoustics: P1 assembly, block preconditioners, spectral checks."""
from .assembly import BlockSystem, Formulation, assemble, assemble_blocks, assemble_rhs, monolithic
from .kernels import BACKEND
from .krylov import ApproxGmres, ExactLU, PcKind, PrecondSpec, SolveReport, fgmres, gmres, solve_system
from .mesh import ForkGeometry, Mesh, fork_domain, read_gmsh, refine, unit_square
from .params import DerivedParams, PhysicalParams, derive, qepas_params, rotade_params

__version__ = "0.1.0"
