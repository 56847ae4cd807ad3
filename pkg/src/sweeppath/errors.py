"""Exception hierarchy.

Validation problems (bad input) derive from :class:`ProblemError`; numerical
failures of the path engine derive from :class:`SolverError`.  The CLI maps
the two families onto exit codes 1 and 2.
"""


class SweepPathError(Exception):
    """Base class for every error raised by the package."""


class ProblemError(SweepPathError, ValueError):
    """The problem data are malformed or violate a modelling assumption."""


class DimensionMismatch(ProblemError):
    pass


class DependentConstraints(ProblemError):
    pass


class RankDeficientDesign(ProblemError):
    pass


class NonpositiveWeight(ProblemError):
    pass


class NonIncreasingAbscissae(ProblemError):
    pass


class InconsistentCoefficients(ProblemError):
    pass


class MissingProvenance(ProblemError):
    """A statistic needs the design matrix / response the problem was built from."""


class SolverError(SweepPathError, ArithmeticError):
    pass


class PivotTooSmall(SolverError):
    def __init__(self, k, value, tolerance=None):
        self.k = k
        self.value = value
        self.tolerance = tolerance
        msg = f"pivot {k} has magnitude {abs(value):.3e}"
        if tolerance is not None:
            msg += f" <= tolerance {tolerance:.3e}"
        super().__init__(msg)


class NotPositiveDefinite(SolverError):
    pass


class NoFurtherEvents(SolverError):
    """Raised by ``advance_segment`` when the current segment never ends."""


class MaxSegmentsExceeded(SolverError):
    pass


class NoValidConfiguration(SolverError):
    pass


class AmbiguousConfiguration(SolverError):
    pass


class PathBreakdown(SolverError):
    """The engine ran out of events while the penalty terms are still active."""


class NonConvergence(SolverError):
    pass


class Infeasible(SolverError):
    pass
