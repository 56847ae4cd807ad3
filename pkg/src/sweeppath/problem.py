"""Quadratic programs with affine constraints and their exact penalty.

The problem is

    minimize    f(x) = 1/2 x'Ax + b'x + c
    subject to  Vx = d,  Wx <= e

with ``A`` symmetric positive definite.  The stacked constraint matrix is
``U = [V; W]`` with right-hand side ``[d; e]``; throughout the package a
constraint is addressed by its row in ``U`` (equalities first).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    DependentConstraints,
    InconsistentCoefficients,
    NonpositiveWeight,
    RankDeficientDesign,
)
from .sweep import full_sweep_inverse

__all__ = [
    "QpProblem",
    "SubgradientCoefficients",
    "make_problem",
    "least_squares_problem",
    "penalized_objective",
    "objective",
    "constraint_residuals",
    "stationarity_residual",
    "recover_coefficients",
    "numerical_rank",
    "RANK_RTOL",
    "COEFF_TOL",
]

RANK_RTOL = 1e-10
COEFF_TOL = 1e-8


def numerical_rank(M, rtol=RANK_RTOL):
    """Rank of ``M`` from a column-pivoted QR factorization."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    # pivot over the rows of M, so factor M'
    R = scipy.linalg.qr(M.T, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > rtol * diag[0]))


@dataclass(frozen=True, eq=False)
class QpProblem:
    """A validated quadratic program; build it with :func:`make_problem`.

    ``X``, ``y`` and ``weights`` record the least squares data the problem
    came from, if any.  They are needed only for degrees of freedom and
    ``C_p`` reporting.
    """

    A: np.ndarray
    b: np.ndarray
    c: float
    V: np.ndarray
    d: np.ndarray
    W: np.ndarray
    e: np.ndarray
    X: np.ndarray = None
    y: np.ndarray = None
    weights: np.ndarray = None
    allow_dependent: bool = False

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def r(self):
        return self.V.shape[0]

    @property
    def s(self):
        return self.W.shape[0]

    @property
    def n_constraints(self):
        return self.r + self.s

    @property
    def U(self):
        return np.vstack([self.V, self.W])

    @property
    def rhs(self):
        """Stacked right-hand side ``[d; e]``."""
        return np.concatenate([self.d, self.e])

    @property
    def is_equality(self):
        return np.arange(self.n_constraints) < self.r

    @property
    def has_provenance(self):
        return self.X is not None and self.y is not None

    @property
    def n_obs(self):
        return None if self.y is None else self.y.shape[0]

    def constraint_kind(self, j):
        """``("eq", i)`` or ``("ineq", i)`` for global constraint index ``j``."""
        return ("eq", j) if j < self.r else ("ineq", j - self.r)


def _as_matrix(M, m, name):
    if M is None:
        return np.zeros((0, m))
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros((0, m))
    M = np.atleast_2d(M)
    if M.ndim != 2 or M.shape[1] != m:
        raise DimensionMismatch(f"{name} must have {m} columns, got shape {M.shape}")
    return M


def _as_vector(v, n, name):
    if v is None:
        v = np.zeros(n)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise DimensionMismatch(f"{name} must have length {n}, got {v.shape[0]}")
    return v


def _check_constraint_rows(V, d, W, e):
    """Reject constraint systems the path engine cannot untangle.

    More than ``m`` rows are necessarily dependent, so the requirement is
    that ``U`` has full rank ``min(r + s, m)``, that the equality rows are
    independent, that no constraint is a positive multiple of another and
    that no row is parallel to an equality row.
    """
    m = V.shape[1]
    U = np.vstack([V, W])
    n = U.shape[0]
    if n == 0:
        return
    if numerical_rank(U) < min(n, m) or numerical_rank(V) < V.shape[0]:
        raise DependentConstraints(f"the {n} constraint rows are linearly dependent")
    aug = np.hstack([U, np.concatenate([d, e])[:, None]])
    norms = np.linalg.norm(aug, axis=1)
    unit = aug / np.where(norms > 0, norms, 1.0)[:, None]
    cos = unit @ unit.T
    i, j = np.nonzero(np.triu(cos > 1.0 - 1e-12, k=1))
    if i.size:
        raise DependentConstraints(f"constraints {int(i[0])} and {int(j[0])} duplicate each other")
    # a row parallel to an equality is either redundant or contradictory
    r = V.shape[0]
    unorm = np.linalg.norm(U, axis=1)
    udir = U / np.where(unorm > 0, unorm, 1.0)[:, None]
    par = np.abs(udir[:r] @ udir.T) > 1.0 - 1e-12
    par[np.arange(r), np.arange(r)] = False
    i, j = np.nonzero(par)
    if i.size:
        raise DependentConstraints(f"constraint {int(j[0])} is parallel to equality {int(i[0])}")


def make_problem(A, b, c=0.0, V=None, d=None, W=None, e=None, *,
                 X=None, y=None, weights=None, allow_dependent=False):
    """Validate and package a quadratic program.

    Parameters
    ----------
    A : array_like, shape (m, m)
        Symmetric positive definite quadratic coefficient.
    b : array_like, shape (m,)
    c : float, optional
        Constant term; it never moves the minimizer.
    V, d : array_like, optional
        Equality constraints ``Vx = d``.
    W, e : array_like, optional
        Inequality constraints ``Wx <= e``.
    X, y, weights : array_like, optional
        Least squares provenance; see :func:`least_squares_problem`.
    allow_dependent : bool
        Skip the rank and duplicate checks on the stacked constraint rows.
        Partial-order constraints on grids contain cycles and are dependent;
        the path engine copes with that by never sweeping a redundant row.

    Raises
    ------
    DimensionMismatch, NotPositiveDefinite
    DependentConstraints
        If the rows of ``U`` are rank deficient (beyond the unavoidable
        dependence of more than ``m`` rows) or two constraints coincide.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    m = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
        raise DimensionMismatch("A must be symmetric")
    A = 0.5 * (A + A.T)
    b = _as_vector(b, m, "b")
    V = _as_matrix(V, m, "V")
    W = _as_matrix(W, m, "W")
    d = _as_vector(d, V.shape[0], "d")
    e = _as_vector(e, W.shape[0], "e")

    # raises NotPositiveDefinite
    full_sweep_inverse(A)

    zero = np.flatnonzero(~np.any(np.vstack([V, W]) != 0.0, axis=1))
    if zero.size:
        raise DependentConstraints(f"constraint row {int(zero[0])} is identically zero")
    if not allow_dependent:
        _check_constraint_rows(V, d, W, e)

    if X is not None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.shape != (y.shape[0], m):
            raise DimensionMismatch(f"X must have shape ({y.shape[0]}, {m}), got {X.shape}")
        weights = np.ones(y.shape[0]) if weights is None else _as_vector(weights, y.shape[0], "weights")

    for arr in (A, b, V, d, W, e):
        arr.setflags(write=False)
    return QpProblem(A=A, b=b, c=float(c), V=V, d=d, W=W, e=e,
                     X=X, y=y, weights=weights, allow_dependent=allow_dependent)


def least_squares_problem(X, y, weights=None, V=None, d=None, W=None, e=None, *,
                          allow_dependent=False):
    """Weighted least squares ``1/2 sum w_i (y_i - x_i'beta)^2`` as a QP.

    Sets ``A = X'diag(w)X``, ``b = -X'diag(w)y`` and ``c = 1/2 y'diag(w)y``
    so that the objective equals half the weighted residual sum of squares.

    Raises
    ------
    NonpositiveWeight
        If any weight is not strictly positive.
    RankDeficientDesign
        If ``X`` lacks full column rank.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    n, m = X.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"y must have length {n}, got {y.shape[0]}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise DimensionMismatch(f"weights must have length {n}, got {w.shape[0]}")
    if np.any(~(w > 0)):
        raise NonpositiveWeight("weights must be strictly positive")
    if n < m or numerical_rank(X.T) < m:
        raise RankDeficientDesign(f"design of shape {X.shape} is not of full column rank")
    Xw = X * w[:, None]
    A = X.T @ Xw
    b = -(Xw.T @ y)
    c = 0.5 * float(y @ (w * y))
    return make_problem(A, b, c, V, d, W, e, X=X, y=y, weights=w,
                        allow_dependent=allow_dependent)


def objective(p, x):
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ p.A @ x) + float(p.b @ x) + p.c


def constraint_residuals(p, x):
    """``Ux - [d; e]``: equality rows first, then inequality rows."""
    return p.U @ np.asarray(x, dtype=float) - p.rhs


def penalized_objective(p, x, rho):
    """Exact penalty ``f(x) + rho*sum|Vx - d| + rho*sum (Wx - e)_+``."""
    x = np.asarray(x, dtype=float)
    pen = np.sum(np.abs(p.V @ x - p.d)) + np.sum(np.maximum(p.W @ x - p.e, 0.0))
    return objective(p, x) + rho * float(pen)


@dataclass(frozen=True)
class SubgradientCoefficients:
    """Coefficients ``s`` (equalities, in [-1, 1]) and ``t`` (inequalities, in [0, 1])."""

    s: np.ndarray
    t: np.ndarray

    @property
    def stacked(self):
        return np.concatenate([self.s, self.t])

    @classmethod
    def from_stacked(cls, coef, r):
        coef = np.asarray(coef, dtype=float)
        return cls(s=coef[:r].copy(), t=coef[r:].copy())


def _subdifferential_bounds(p, x, residual_tol):
    """Lower and upper ends of each coefficient's admissible interval."""
    res = constraint_residuals(p, x)
    eq = p.is_equality
    lo = np.where(eq, -1.0, 0.0)
    hi = np.ones_like(lo)
    neg = res < -residual_tol
    pos = res > residual_tol
    lo = np.where(pos, 1.0, lo)
    hi = np.where(neg, np.where(eq, -1.0, 0.0), hi)
    return lo, hi


def stationarity_residual(p, x, rho, coeffs, coeff_tol=COEFF_TOL, residual_tol=None):
    """Gradient of the penalized objective for the given subgradient choice.

    Returns ``Ax + b + rho*(V's + W't)``.  A vanishing result certifies that
    ``x`` minimizes the exact penalty at ``rho``.

    Raises
    ------
    InconsistentCoefficients
        If some coefficient lies outside the subdifferential dictated by the
        sign of its constraint residual (by more than ``coeff_tol``).
    """
    x = np.asarray(x, dtype=float)
    if residual_tol is None:
        residual_tol = 1e-9 * (1.0 + (np.max(np.abs(p.rhs)) if p.n_constraints else 0.0))
    coef = coeffs.stacked if isinstance(coeffs, SubgradientCoefficients) else np.asarray(coeffs, float)
    if coef.shape[0] != p.n_constraints:
        raise DimensionMismatch("coefficient vector has the wrong length")
    lo, hi = _subdifferential_bounds(p, x, residual_tol)
    bad = np.flatnonzero((coef < lo - coeff_tol) | (coef > hi + coeff_tol))
    if bad.size:
        j = int(bad[0])
        raise InconsistentCoefficients(
            f"coefficient {j} = {coef[j]:.6g} lies outside [{lo[j]:g}, {hi[j]:g}]"
        )
    return p.A @ x + p.b + rho * (p.U.T @ coef)


def recover_coefficients(p, x, rho):
    """Least squares recovery of the subgradient coefficients at ``x``.

    Multiplying the stationarity condition by ``U`` gives
    ``rho*(s; t) = -(UU')^{-1} U (Ax + b)``.
    """
    if not rho > 0:
        raise ValueError("coefficients are only identifiable for rho > 0")
    U = p.U
    grad = p.A @ np.asarray(x, dtype=float) + p.b
    lam = -np.linalg.lstsq(U.T, grad, rcond=None)[0]
    return SubgradientCoefficients.from_stacked(lam / rho, p.r)
