"""Brute-force reference solvers used to check the path engine.

None of these routines touch the sweep operator; they rely on plain dense
linear solves so that agreement with the path is meaningful.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import lsq_linear

from .errors import Infeasible, NonConvergence
from .problem import constraint_residuals, objective

__all__ = [
    "OracleSolution",
    "solve_constrained_enumeration",
    "minimize_penalized_grid",
    "pava_isotone",
    "kkt_residual",
    "penalized_kkt_violation",
]


@dataclass(frozen=True, eq=False)
class OracleSolution:
    x: np.ndarray
    active_set: tuple
    multipliers: np.ndarray
    objective: float


def kkt_residual(p, x, multipliers):
    """Norm of ``Ax + b + U'lambda`` for the full multiplier vector."""
    return float(np.linalg.norm(p.A @ x + p.b + p.U.T @ multipliers))


def _solve_kkt(A, b, U, c):
    k = U.shape[0]
    K = np.block([[A, U.T], [U, np.zeros((k, k))]])
    rhs = np.concatenate([-b, c])
    sol = np.linalg.solve(K, rhs)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("non-finite KKT solution")
    return sol[:A.shape[0]], sol[A.shape[0]:]


def solve_constrained_enumeration(p, feas_tol=1e-9, mult_tol=1e-10, max_inequalities=20):
    """Minimize ``f`` subject to the constraints by trying every active set.

    All equalities are always imposed.  For each subset ``S`` of the
    inequalities the equality-constrained KKT system is solved; a subset
    whose solution is feasible and has nonnegative inequality multipliers
    solves the problem.  Singular subsets (dependent rows) are skipped.
    Subsets are visited by increasing size and the first certified point
    is returned, since strict convexity makes the minimizer unique.

    Raises
    ------
    Infeasible
        If no subset yields a KKT point.
    """
    r, s = p.r, p.s
    if s > max_inequalities:
        raise ValueError(f"enumeration over {s} inequalities is too expensive")
    U, rhs = p.U, p.rhs
    scale = 1.0 + float(np.max(np.abs(rhs))) if rhs.size else 1.0
    best = None
    for size in range(min(s, p.m - r) + 1):
        for S in combinations(range(s), size):
            rows = list(range(r)) + [r + j for j in S]
            try:
                x, lam = _solve_kkt(p.A, p.b, U[rows], rhs[rows])
            except np.linalg.LinAlgError:
                continue
            if not np.all(p.W @ x <= p.e + feas_tol * scale):
                continue
            if np.any(lam[r:] < -mult_tol * (1.0 + np.max(np.abs(lam), initial=0.0))):
                continue
            full = np.zeros(r + s)
            full[rows] = lam
            if np.linalg.norm(p.V @ x - p.d) > feas_tol * scale:
                continue
            cand = OracleSolution(x=x, active_set=tuple(rows), multipliers=full,
                                  objective=objective(p, x))
            if best is None or cand.objective < best.objective - 1e-12:
                best = cand
        if best is not None:
            return best
    raise Infeasible("no active set produced a feasible KKT point")


def minimize_penalized_grid(p, rho, x0=None, tol=1e-14, kkt_tol=1e-10, max_sweeps=200000):
    """Minimize the exact penalty at a fixed ``rho``.

    The penalized objective is not separable, so plain coordinate descent
    on ``x`` can stall at a kink.  Its dual is a box-constrained concave
    quadratic in the subgradient coefficients ``(s, t)``:

        max  -1/2 (b + rho U'u)' A^{-1} (b + rho U'u) - rho u'[d; e]
        s.t. -1 <= s <= 1,  0 <= t <= 1,

    and exact coordinate ascent on it converges (Hildreth's method).  The
    primal point is ``x = -A^{-1}(b + rho U'u)``.

    Parameters
    ----------
    x0 : array_like, optional
        Warm start; the initial coefficients follow its residual signs.
    kkt_tol : float
        Accept a point once :func:`penalized_kkt_violation` is below this.

    Raises
    ------
    NonConvergence
        If the coordinate sweeps do not settle within ``max_sweeps``.
    """
    Ainv = np.linalg.inv(p.A)
    if rho <= 0 or p.n_constraints == 0:
        return -Ainv @ p.b
    U, rhs, r = p.U, p.rhs, p.r
    n = U.shape[0]
    lo = np.where(np.arange(n) < r, -1.0, 0.0)
    hi = np.ones(n)
    if x0 is None:
        x0 = -Ainv @ p.b
    res0 = constraint_residuals(p, x0)
    u = np.clip(np.sign(res0), lo, hi)
    G = U @ Ainv @ U.T
    AUt = Ainv @ U.T
    x = -Ainv @ p.b - rho * (AUt @ u)
    diag = rho * np.diag(G)
    for sweep in range(1, max_sweeps + 1):
        biggest = 0.0
        for i in range(n):
            # residual_i(x) is the gradient of the dual in coordinate i (up to rho)
            res_i = U[i] @ x - rhs[i]
            new = min(max(u[i] + res_i / diag[i], lo[i]), hi[i])
            delta = new - u[i]
            if delta != 0.0:
                u[i] = new
                x -= rho * delta * AUt[:, i]
                biggest = max(biggest, abs(delta))
        # x settling is not enough: when U has more rows than columns u can
        # still drift along null(U') and move the dual's linear term
        if biggest <= tol or sweep % 25 == 0:
            cand = _polish(p, rho, Ainv, u, lo, hi)
            if penalized_kkt_violation(p, rho, cand) <= kkt_tol:
                return cand
            if biggest == 0.0:
                break
    raise NonConvergence(f"dual coordinate ascent did not converge at rho={rho}")


def penalized_kkt_violation(p, rho, x):
    """How far ``x`` is from minimizing the exact penalty at ``rho``.

    Coefficients of non-tight constraints are fixed by their residual signs;
    those of tight constraints are fitted by bounded least squares.  The
    return value is the remaining stationarity residual relative to the
    scale of the data.
    """
    U, rhs = p.U, p.rhs
    g = p.A @ x + p.b
    scale = 1.0 + float(np.max(np.abs(p.b))) + float(np.max(np.abs(p.A))) * (1.0 + float(np.max(np.abs(x))))
    res = U @ x - rhs
    rtol = 1e-9 * (1.0 + float(np.max(np.abs(rhs))) + float(np.max(np.abs(U))) * float(np.max(np.abs(x))))
    n, r = U.shape[0], p.r
    lo = np.where(np.arange(n) < r, -1.0, 0.0)
    fixed_val = np.where(res > rtol, 1.0, np.where(res < -rtol, lo, np.nan))
    tight = np.isnan(fixed_val)
    rest = g + rho * (U[~tight].T @ fixed_val[~tight])
    if tight.any():
        # redundant tight rows admit many coefficient vectors; look for one in the box
        fit = lsq_linear(rho * U[tight].T, -rest, bounds=(lo[tight], np.ones(int(tight.sum()))),
                         method="bvls", tol=1e-14)
        stat = rest + rho * (U[tight].T @ fit.x)
    else:
        stat = rest
    return float(np.max(np.abs(stat), initial=0.0)) / scale


def _polish(p, rho, Ainv, u, lo, hi, tol=1e-9):
    """Solve exactly for the free dual coordinates with the bound ones fixed.

    Falls back to the unpolished point if the refined coefficients leave the
    box, which only happens when the ascent had not identified the bounds.
    """
    U, rhs = p.U, p.rhs
    x = -Ainv @ (p.b + rho * (U.T @ u))
    free = np.flatnonzero((u > lo + tol) & (u < hi - tol))
    if not free.size:
        return x
    fixed = np.setdiff1d(np.arange(u.size), free)
    # residual_F(x) = 0 with x = -Ainv(b + rho U_F' u_F + rho U_B' u_B)
    base = -Ainv @ (p.b + rho * (U[fixed].T @ u[fixed]))
    M = rho * U[free] @ Ainv @ U[free].T
    target = U[free] @ base - rhs[free]
    uf, *_ = np.linalg.lstsq(M, target, rcond=None)
    if np.any(uf < lo[free] - 1e-7) or np.any(uf > hi[free] + 1e-7):
        return x
    u2 = u.copy()
    u2[free] = uf
    return -Ainv @ (p.b + rho * (U.T @ u2))


def pava_isotone(y, weights=None):
    """Weighted isotonic (nondecreasing) regression by pooling adjacent violators."""
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    means, wts, sizes = [], [], []
    for yi, wi in zip(y, w):
        means.append(yi)
        wts.append(wi)
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, n2 = means.pop(), wts.pop(), sizes.pop()
            m1, w1, n1 = means.pop(), wts.pop(), sizes.pop()
            wt = w1 + w2
            means.append((w1 * m1 + w2 * m2) / wt)
            wts.append(wt)
            sizes.append(n1 + n2)
    return np.repeat(means, sizes)
