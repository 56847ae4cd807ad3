"""Degrees of freedom and Mallows' C_p along a least squares path.

For a least squares problem with design ``X`` the fitted values on a
segment with active set ``Z`` are linear in ``y`` with hat matrix
``X P X' diag(w)``, where ``P`` is the upper left block of the swept
tableau.  Its trace is ``m - |Z|``, which is the degrees of freedom used
here.
"""

from dataclasses import dataclass
from numbers import Integral

import numpy as np

from .errors import MissingProvenance
from .problem import QpProblem

__all__ = [
    "SegmentDiagnostics",
    "PathDiagnostics",
    "degrees_of_freedom",
    "weighted_rss",
    "cp_statistic",
    "estimate_sigma2",
    "rss_profile",
    "cp_profile",
    "diagnose_path",
    "hat_matrix_trace",
]


def _require_provenance(p):
    if not isinstance(p, QpProblem) or not p.has_provenance:
        raise MissingProvenance("this statistic needs a problem built from a design matrix and response")


def degrees_of_freedom(segment, p):
    """``m - |Z|`` for the active set of ``segment``.

    Parameters
    ----------
    segment : PathSegment
    p : QpProblem or int
        The problem the path belongs to, or just its dimension ``m``.  When
        a problem is passed it must carry least squares provenance.

    Raises
    ------
    MissingProvenance
        If ``p`` is a problem that was not built from a design matrix.
    """
    if isinstance(p, Integral):
        m = int(p)
    else:
        _require_provenance(p)
        m = p.m
    df = m - len(segment.active)
    if not 0 <= df <= m:
        raise ValueError(f"segment has {len(segment.active)} active constraints for m={m}")
    return df


def weighted_rss(p, x):
    """``sum_i w_i (y_i - x_i'beta)^2``."""
    _require_provenance(p)
    resid = p.y - p.X @ np.asarray(x, dtype=float)
    return float(np.sum(p.weights * resid * resid))


def cp_statistic(p, x, df, sigma2):
    """Mallows' ``C_p = RSS/n + 2 sigma^2 df / n``.

    Raises
    ------
    MissingProvenance
    """
    _require_provenance(p)
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    n = p.n_obs
    return weighted_rss(p, x) / n + 2.0 * sigma2 * df / n


def estimate_sigma2(p, path=None):
    """Residual variance ``RSS/(n - m)`` of the unconstrained fit.

    Raises
    ------
    ValueError
        When ``n <= m``; ``sigma2`` must then be supplied by the caller.
    """
    _require_provenance(p)
    n, m = p.n_obs, p.m
    if n <= m:
        raise ValueError(f"cannot estimate sigma2 with n={n} observations and m={m} parameters")
    x0 = path.eval_at(0.0) if path is not None else np.linalg.solve(p.A, -p.b)
    return weighted_rss(p, x0) / (n - m)


def rss_profile(path, p, grid):
    """``(rho, rss, df)`` for each penalty in ``grid``."""
    _require_provenance(p)
    out = []
    for rho in grid:
        rho = float(rho)
        seg = path.segment_at(rho)
        out.append((rho, weighted_rss(p, path.eval_at(rho)), p.m - len(seg.active)))
    return out


def cp_profile(path, p, grid, sigma2):
    """``(rho, rss, df, cp)`` for each penalty in ``grid``."""
    rows = rss_profile(path, p, grid)
    n = p.n_obs
    return [(rho, rss, df, rss / n + 2.0 * sigma2 * df / n) for rho, rss, df in rows]


@dataclass(frozen=True)
class SegmentDiagnostics:
    rho_interval: tuple
    df: int
    rss: float
    cp: float


@dataclass(frozen=True)
class PathDiagnostics:
    """Per-segment df, RSS and C_p, evaluated at each segment's start."""

    segments: tuple
    sigma2: float

    def best(self):
        """Segment with the smallest C_p."""
        return min(self.segments, key=lambda s: s.cp)


def diagnose_path(path, p, sigma2=None):
    """Summarize every segment of ``path``; ``sigma2`` defaults to the unconstrained estimate."""
    _require_provenance(p)
    if sigma2 is None:
        sigma2 = estimate_sigma2(p, path)
    recs = []
    for seg in path.segments:
        df = degrees_of_freedom(seg, p)
        rss = weighted_rss(p, seg.x_start)
        recs.append(SegmentDiagnostics(
            rho_interval=(seg.rho_start, seg.rho_end), df=df, rss=rss,
            cp=rss / p.n_obs + 2.0 * sigma2 * df / p.n_obs,
        ))
    return PathDiagnostics(segments=tuple(recs), sigma2=float(sigma2))


def hat_matrix_trace(p, active):
    """Trace of ``X P X' diag(w)`` built without the sweep operator.

    ``P = A^{-1} - A^{-1}U_Z'(U_Z A^{-1} U_Z')^+ U_Z A^{-1}``, with a
    pseudo-inverse so that redundant active rows are harmless.
    """
    _require_provenance(p)
    Ainv = np.linalg.inv(p.A)
    UZ = p.U[list(active)]
    if UZ.shape[0]:
        AU = Ainv @ UZ.T
        P = Ainv - AU @ np.linalg.pinv(UZ @ AU) @ AU.T
    else:
        P = Ainv
    return float(np.trace(p.X @ P @ (p.X.T * p.weights)))
