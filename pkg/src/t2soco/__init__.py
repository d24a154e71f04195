"""Interior-point solver for block type-2 second-order cone programs.

The cone of each block is {x : (x1+x2)^2 >= 2*sum(x_i^2, i>=3),
x1 >= x2, x1+x2 >= 0}; the solver follows the central path of the
associated Jordan algebra with kernel-function barriers and
Nesterov-Todd-scaled Newton steps.
"""

from .cones import (
    BlockShape,
    ConeVector,
    SpectralDecomposition,
    arrow_matrix,
    block_eigenvalues,
    decompose,
    dets,
    eigenvalues,
    jordan_product,
    membership,
    random_interior,
    reconstruct,
    trace,
    unit,
)
from .kernels import (
    BoundConstants,
    IterationBound,
    KernelFunction,
    barrier,
    bound_L,
    eligibility_check,
    estimate_bound_constants,
    iteration_bound,
    kernel_from_spec,
    log_kernel,
    parametric_kernel,
    proximity,
    rho,
    varrho,
)
from .newton import Directions, ProblemData, residuals, solve_directions
from .problem_io import ProblemDocument, ProblemFormatError, load_problem, parse_problem
from .scaling import NTScaling, ScalingError, nt_lambda, nt_point, scaled_v, w_matrix
from .solver import (
    GeneratedInstance,
    SolveReport,
    SolverConfig,
    SolveStatus,
    generate_instance,
    max_feasible_step,
    solve,
    step_size,
)
from .transform import (
    BlowupReport,
    TransformedProblem,
    blowup_report,
    map_point,
    map_solution,
    to_soco,
)

__version__ = "1.0.0"

__all__ = [
    "BlockShape",
    "ConeVector",
    "SpectralDecomposition",
    "arrow_matrix",
    "block_eigenvalues",
    "decompose",
    "dets",
    "eigenvalues",
    "jordan_product",
    "membership",
    "random_interior",
    "reconstruct",
    "trace",
    "unit",
    "BoundConstants",
    "IterationBound",
    "KernelFunction",
    "barrier",
    "bound_L",
    "eligibility_check",
    "estimate_bound_constants",
    "iteration_bound",
    "kernel_from_spec",
    "log_kernel",
    "parametric_kernel",
    "proximity",
    "rho",
    "varrho",
    "Directions",
    "ProblemData",
    "residuals",
    "solve_directions",
    "ProblemDocument",
    "ProblemFormatError",
    "load_problem",
    "parse_problem",
    "NTScaling",
    "ScalingError",
    "nt_lambda",
    "nt_point",
    "scaled_v",
    "w_matrix",
    "GeneratedInstance",
    "SolveReport",
    "SolverConfig",
    "SolveStatus",
    "generate_instance",
    "max_feasible_step",
    "solve",
    "step_size",
    "BlowupReport",
    "TransformedProblem",
    "blowup_report",
    "map_point",
    "map_solution",
    "to_soco",
    "__version__",
]
