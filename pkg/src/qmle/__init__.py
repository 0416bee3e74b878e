"""Maximum-likelihood quantum state tomography.

The main entry point is :func:`qmle.solvers.run`, which minimizes the
negative log-likelihood of a :class:`qmle.model.MeasurementEnsemble` over
density matrices and reports a computable bound on the remaining gap.
"""

from .errors import (
    DegenerateAsset,
    DimensionError,
    EmptyEnsemble,
    InvalidReturns,
    InvariantViolation,
    LineSearchFailed,
    NonPositiveLikelihood,
    NotCommuting,
    NotNormalizable,
    NotPositiveDefinite,
    NumericError,
    ParseError,
    QmleError,
    ValidationError,
)
from .linalg import eigh, hermitize, hs_inner, matrix_exp, matrix_log, trace_normalize
from .model import (
    MeasurementEnsemble,
    ReductionMap,
    born_probabilities,
    certificate,
    kernel_reduce,
    lift_state,
    objective,
    r_map,
)
from .problems import (
    ProblemInstance,
    gen_instance,
    gen_projective_ensemble,
    gen_true_state,
    portfolio_from_returns,
    rrr_cycle_instance,
    sample_counts,
)
from .solvers import (
    ConvergenceReport,
    PortfolioProblem,
    SolverOptions,
    SolverState,
    TraceRecord,
    diagonal_extract,
    initial_state,
    run,
    solve_portfolio,
    step_cover,
    step_diluted,
    step_qem,
    step_rrr,
)

__version__ = "0.1.0"
