"""Sweep and inverse-sweep pivots on a dense symmetric tableau.

Sweeping diagonal entry ``k`` of a symmetric matrix ``a`` produces

    a[k, k] -> -1 / a[k, k]
    a[i, k] ->  a[i, k] / a[k, k]                        (i != k)
    a[i, j] ->  a[i, j] - a[i, k] * a[k, j] / a[k, k]    (i, j != k)

and the inverse sweep is identical except that the off-diagonal entries of
row and column ``k`` change sign.  Sweeps on distinct indices commute, and
sweeping every diagonal entry of a positive definite matrix yields its
negated inverse.
"""

import numpy as np

from .errors import NotPositiveDefinite, PivotTooSmall

__all__ = [
    "SymmetricTableau",
    "sweep",
    "inverse_sweep",
    "full_sweep_inverse",
    "DEFAULT_PIVOT_RTOL",
]

DEFAULT_PIVOT_RTOL = 1e-12


class SymmetricTableau:
    """Dense symmetric matrix with per-index swept flags.

    The matrix is stored in full.  Every update is a symmetric rank-one
    correction whose ``(i, j)`` and ``(j, i)`` entries are computed by the
    same floating point operations, so symmetry holds bit for bit without
    a separate triangle.

    Parameters
    ----------
    entries : array_like, shape (n, n)
        Initial symmetric matrix.  It is copied.
    pivot_rtol : float
        A sweep on ``k`` is refused when ``|a[k, k]|`` does not exceed
        ``pivot_rtol * pivot_scale[k]``.
    check_symmetry : bool
        Reject input that is not symmetric to within ``1e-12`` relative.
    """

    def __init__(self, entries, pivot_rtol=DEFAULT_PIVOT_RTOL, check_symmetry=True):
        a = np.array(entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"tableau must be square, got shape {a.shape}")
        if check_symmetry:
            scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
            if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
                raise ValueError("tableau entries are not symmetric")
            # store the exactly symmetric average
            a = 0.5 * (a + a.T)
        self.entries = a
        self.swept = np.zeros(a.shape[0], dtype=bool)
        self.pivot_rtol = float(pivot_rtol)
        self.pivot_scale = np.maximum(1.0, np.abs(np.diag(a)).copy())

    @property
    def dim(self):
        return self.entries.shape[0]

    def copy(self):
        out = SymmetricTableau.__new__(SymmetricTableau)
        out.entries = self.entries.copy()
        out.swept = self.swept.copy()
        out.pivot_rtol = self.pivot_rtol
        out.pivot_scale = self.pivot_scale.copy()
        return out

    def pivot_tolerance(self, k):
        return self.pivot_rtol * self.pivot_scale[k]

    def _pivot(self, k, sign):
        a = self.entries
        akk = a[k, k]
        tol = self.pivot_tolerance(k)
        if not abs(akk) > tol:
            raise PivotTooSmall(k, akk, tol)
        col = a[:, k].copy()
        a -= np.outer(col, col) / akk
        scaled = (sign / akk) * col
        a[:, k] = scaled
        a[k, :] = scaled
        a[k, k] = -1.0 / akk
        self.swept[k] = not self.swept[k]

    def sweep(self, k):
        """Sweep diagonal entry ``k`` in place and return ``self``."""
        self._pivot(k, 1.0)
        return self

    def inverse_sweep(self, k):
        """Undo a sweep on diagonal entry ``k`` in place and return ``self``."""
        self._pivot(k, -1.0)
        return self

    def sweep_many(self, indices):
        for k in indices:
            self.sweep(k)
        return self

    def inverse_sweep_many(self, indices):
        for k in indices:
            self.inverse_sweep(k)
        return self

    def toggle(self, k):
        """Sweep ``k`` if it is unswept, otherwise inverse-sweep it."""
        if self.swept[k]:
            return self.inverse_sweep(k)
        return self.sweep(k)

    def block(self, rows, cols):
        return self.entries[np.ix_(np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))]

    def to_array(self):
        return self.entries.copy()

    def __repr__(self):
        return f"SymmetricTableau(dim={self.dim}, swept={np.flatnonzero(self.swept).tolist()})"


def sweep(tab, k):
    """Sweep ``tab`` on diagonal entry ``k`` (in place); returns ``tab``."""
    return tab.sweep(k)


def inverse_sweep(tab, k):
    """Inverse-sweep ``tab`` on diagonal entry ``k`` (in place); returns ``tab``."""
    return tab.inverse_sweep(k)


def full_sweep_inverse(A, pivot_rtol=DEFAULT_PIVOT_RTOL):
    """Invert a symmetric positive definite matrix by complete sweeping.

    A symmetric matrix is positive definite exactly when every diagonal
    entry is still positive at the moment it is swept.  That criterion is
    enforced here, so the routine doubles as a definiteness test.

    Parameters
    ----------
    A : array_like, shape (m, m)
        Symmetric matrix.
    pivot_rtol : float
        Relative pivot threshold; see :class:`SymmetricTableau`.

    Returns
    -------
    ndarray
        ``A^{-1}``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is non-positive or too small before it is swept.
    """
    tab = SymmetricTableau(A, pivot_rtol=pivot_rtol)
    for k in range(tab.dim):
        akk = tab.entries[k, k]
        if not akk > tab.pivot_tolerance(k):
            raise NotPositiveDefinite(
                f"diagonal entry {k} equals {akk:.3e} just before sweeping"
            )
        tab.sweep(k)
    return -tab.entries
