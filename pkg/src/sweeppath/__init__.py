"""Exact penalty solution paths for strictly convex quadratic programs.

The path ``x(rho)`` of minimizers of

    1/2 x'Ax + b'x + c + rho * (sum |Vx - d| + sum (Wx - e)_+)

is piecewise linear in ``rho`` and reaches the constrained minimizer at a
finite penalty.  :func:`solve_path` traces it with sweep operations on a
bordered symmetric tableau.
"""

from .errors import (
    AmbiguousConfiguration,
    DependentConstraints,
    DimensionMismatch,
    Infeasible,
    InconsistentCoefficients,
    MaxSegmentsExceeded,
    MissingProvenance,
    NoFurtherEvents,
    NonConvergence,
    NonIncreasingAbscissae,
    NonpositiveWeight,
    NotPositiveDefinite,
    NoValidConfiguration,
    PathBreakdown,
    PivotTooSmall,
    ProblemError,
    RankDeficientDesign,
    SolverError,
    SweepPathError,
)
from .path import (
    AnomalyRecord,
    Event,
    IndexSets,
    PathSegment,
    SolutionPath,
    Tolerances,
    advance_segment,
    eval_at,
    initialize_path,
    resolve_configuration,
    solve_path,
)
from .problem import (
    QpProblem,
    SubgradientCoefficients,
    least_squares_problem,
    make_problem,
    penalized_objective,
    stationarity_residual,
)
from .selection import (
    PathDiagnostics,
    cp_statistic,
    degrees_of_freedom,
    diagnose_path,
    rss_profile,
)
from .shapes import (
    ShapeSpec,
    concavity_constraints,
    convexity_constraints,
    isotone_constraints,
    matrix_partial_order,
    weighted_mean_fit_problem,
)
from .sweep import SymmetricTableau, full_sweep_inverse, inverse_sweep, sweep

__version__ = "0.1.0"

__all__ = [
    "AmbiguousConfiguration",
    "DependentConstraints",
    "DimensionMismatch",
    "Infeasible",
    "InconsistentCoefficients",
    "MaxSegmentsExceeded",
    "MissingProvenance",
    "NoFurtherEvents",
    "NonConvergence",
    "NonIncreasingAbscissae",
    "NonpositiveWeight",
    "NotPositiveDefinite",
    "NoValidConfiguration",
    "PathBreakdown",
    "PivotTooSmall",
    "ProblemError",
    "RankDeficientDesign",
    "SolverError",
    "SweepPathError",
    "AnomalyRecord",
    "Event",
    "IndexSets",
    "PathSegment",
    "SolutionPath",
    "Tolerances",
    "advance_segment",
    "eval_at",
    "initialize_path",
    "resolve_configuration",
    "solve_path",
    "QpProblem",
    "SubgradientCoefficients",
    "least_squares_problem",
    "make_problem",
    "penalized_objective",
    "stationarity_residual",
    "PathDiagnostics",
    "cp_statistic",
    "degrees_of_freedom",
    "diagnose_path",
    "rss_profile",
    "ShapeSpec",
    "concavity_constraints",
    "convexity_constraints",
    "isotone_constraints",
    "matrix_partial_order",
    "weighted_mean_fit_problem",
    "SymmetricTableau",
    "full_sweep_inverse",
    "inverse_sweep",
    "sweep",
]

