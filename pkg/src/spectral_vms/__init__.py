"""Spectral variational multiscale solvers for 1D advection-diffusion problems."""

__version__ = "0.1.0"

from .analysis import (
    CFLQuantities,
    ConvergenceStudy,
    ErrorReport,
    ExactEvolutiveSeries,
    cfl_quantities,
    convergence_slope,
    error_norms,
    exact_stationary,
    overshoot_metric,
    p1_h1_seminorm,
    p1_l2_norm,
    prolong_nodal,
    stationary_error_table,
    stationary_errors,
    total_variation,
)
from .fem import (
    GalerkinMatrices,
    Mesh1D,
    SingularPivotError,
    TridiagonalMatrix,
    assemble_galerkin,
    build_mesh,
    galerkin_load_stationary,
    p1_load,
    thomas_solve,
)
from .solvers import (
    EvolutiveProblem,
    Galerkin,
    SolutionTrajectory,
    SolverStepError,
    SpectralVMS,
    StationaryProblem,
    TauVMS,
    box_initial,
    solve_evolutive,
    solve_stationary,
    step_evolutive,
    step_evolutive_tau,
)
from .stabilization import (
    GreenFunctionTruncation,
    StabilizationBlocks,
    TauPair,
    assemble_stabilization,
    bubble_eval,
    green_truncated,
    stabilization_matrix,
    tau_exact,
    tau_pair,
    tau_truncated,
)
from .subscales import (
    EigenMode,
    ElementSpectralBasis,
    OperatorScaling,
    build_bases,
    laplace_eigenvalue,
    operator_eigenvalue,
)
