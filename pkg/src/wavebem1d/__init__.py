"""Space-time Galerkin boundary elements for the 1d wave equation.

Solves the second-kind boundary integral equation (+-Id/2 + K) z = g on the
lateral boundary {0, L} x (0, T) with piecewise constant or piecewise linear
elements, and measures errors, condition numbers and inf-sup constants in
the natural H^{1/2}_{0,} norms.
"""

from .basis import DiscreteSpace, PiecewiseLinear, SpaceKind, TraceFunction, nodal_interpolate, to_trace
from .errors import ModeTruncationWarning, OutOfDomainError, PreconditionError, SingularMatrixError
from .experiments import convergence_study, h_half_error, infsup_study, make_problem, solve_problem
from .mesh import LateralMesh, paper_nonuniform_initial, refine, shifted_pair_mesh, slice_count, uniform_mesh
from .operator import EXTERIOR, INTERIOR, apply_K, assemble_matrix, assemble_rhs, mass_matrix
from .solver import InfSupProblem, condition_number_2, infsup_constant, solve_dense
from .spectral import dual_gram, h_half_norm, primal_gram, sine_coefficients

__version__ = "0.1.0"

__all__ = [
    "DiscreteSpace",
    "EXTERIOR",
    "INTERIOR",
    "InfSupProblem",
    "LateralMesh",
    "ModeTruncationWarning",
    "OutOfDomainError",
    "PiecewiseLinear",
    "PreconditionError",
    "SingularMatrixError",
    "SpaceKind",
    "TraceFunction",
    "apply_K",
    "assemble_matrix",
    "assemble_rhs",
    "condition_number_2",
    "convergence_study",
    "dual_gram",
    "h_half_error",
    "h_half_norm",
    "infsup_constant",
    "infsup_study",
    "make_problem",
    "mass_matrix",
    "nodal_interpolate",
    "paper_nonuniform_initial",
    "primal_gram",
    "refine",
    "shifted_pair_mesh",
    "sine_coefficients",
    "slice_count",
    "solve_dense",
    "solve_problem",
    "to_trace",
    "uniform_mesh",
]
