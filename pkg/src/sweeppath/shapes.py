"""Constraint builders for shape restricted regression.

Every builder returns ``(W, e)`` for inequality constraints ``W theta <= e``.
Grids are vectorized in row-major order, so ``theta[i, j]`` of a
``rows x cols`` grid sits at position ``i * cols + j``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonIncreasingAbscissae, NonpositiveWeight
from .problem import least_squares_problem

__all__ = [
    "SHAPE_KINDS",
    "ShapeSpec",
    "isotone_constraints",
    "antitone_constraints",
    "concavity_constraints",
    "convexity_constraints",
    "nonnegativity_constraints",
    "bound_sum_constraints",
    "matrix_partial_order",
    "shape_constraints",
    "weighted_mean_fit_problem",
]

SHAPE_KINDS = ("isotone", "antitone", "concave", "convex", "nonnegative",
               "matrix-partial-order", "bound-sum")


@dataclass(frozen=True)
class ShapeSpec:
    """Declarative description of one family of shape constraints.

    Parameters
    ----------
    kind : str
        One of :data:`SHAPE_KINDS`.
    knots : sequence of float, optional
        Strictly increasing abscissae for ``concave`` / ``convex``.  Unit
        spacing is assumed when omitted.
    grid_shape : (int, int), optional
        Required for ``matrix-partial-order``.
    indices : sequence of int, optional
        Positions of the parameter vector the shape applies to, in order.
        Defaults to all of them.
    bound : float
        Right-hand side for ``bound-sum``.
    nonneg_corner : bool
        Add ``theta_11 >= 0`` to a matrix partial order.
    """

    kind: str
    knots: tuple = None
    grid_shape: tuple = None
    indices: tuple = None
    bound: float = 0.0
    nonneg_corner: bool = False

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {SHAPE_KINDS}")
        if self.knots is not None:
            object.__setattr__(self, "knots", tuple(float(t) for t in self.knots))
            _check_increasing(np.asarray(self.knots))
        if self.kind == "matrix-partial-order" and self.grid_shape is None:
            raise ValueError("matrix-partial-order needs grid_shape=(rows, cols)")
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


def _check_increasing(x):
    if x.ndim != 1:
        raise DimensionMismatch("abscissae must be a vector")
    if np.any(~(np.diff(x) > 0)):
        raise NonIncreasingAbscissae("abscissae must be strictly increasing")


def isotone_constraints(m):
    """Rows ``theta_i - theta_{i+1} <= 0`` for ``i = 1, ..., m-1``."""
    if m < 2:
        raise ValueError("isotone constraints need m >= 2")
    W = np.zeros((m - 1, m))
    idx = np.arange(m - 1)
    W[idx, idx] = 1.0
    W[idx, idx + 1] = -1.0
    return W, np.zeros(m - 1)


def antitone_constraints(m):
    W, e = isotone_constraints(m)
    return -W, e


def concavity_constraints(x):
    """Nonincreasing difference quotients at strictly increasing knots ``x``.

    With spacings ``h_i = x_{i+1} - x_i`` the condition
    ``(theta_{i+1} - theta_i)/h_i <= (theta_i - theta_{i-1})/h_{i-1}`` is
    multiplied through by ``h_{i-1} h_i`` and divided by the mean spacing
    ``(h_{i-1} + h_i)/2``.  The middle coefficient is then always ``-2`` and
    uniform knots give the familiar ``(1, -2, 1)`` rows.

    Raises
    ------
    NonIncreasingAbscissae
    """
    x = np.asarray(x, dtype=float)
    _check_increasing(x)
    n = x.shape[0]
    if n < 3:
        return np.zeros((0, n)), np.zeros(0)
    h = np.diff(x)
    left, right = h[:-1], h[1:]
    mid = 0.5 * (left + right)
    W = np.zeros((n - 2, n))
    rows = np.arange(n - 2)
    W[rows, rows] = right / mid
    W[rows, rows + 1] = -2.0
    W[rows, rows + 2] = left / mid
    return W, np.zeros(n - 2)


def convexity_constraints(x):
    W, e = concavity_constraints(x)
    return -W, e


def nonnegativity_constraints(m):
    """Rows ``-theta_i <= 0``."""
    return -np.eye(m), np.zeros(m)


def bound_sum_constraints(m, bound):
    """Single row ``sum_i theta_i <= bound``."""
    return np.ones((1, m)), np.array([float(bound)])


def matrix_partial_order(rows, cols, nonneg_corner=False):
    """Order a ``rows x cols`` grid increasingly along both axes.

    Emits ``theta_ij - theta_{i,j+1} <= 0`` for every horizontal neighbour
    pair, then ``theta_ij - theta_{i+1,j} <= 0`` for every vertical pair.
    The optional ``-theta_11 <= 0`` row comes first.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    m = rows * cols
    out = []
    if nonneg_corner:
        r = np.zeros(m)
        r[0] = -1.0
        out.append(r)
    for i in range(rows):
        for j in range(cols - 1):
            r = np.zeros(m)
            r[i * cols + j], r[i * cols + j + 1] = 1.0, -1.0
            out.append(r)
    for i in range(rows - 1):
        for j in range(cols):
            r = np.zeros(m)
            r[i * cols + j], r[(i + 1) * cols + j] = 1.0, -1.0
            out.append(r)
    W = np.array(out).reshape(len(out), m)
    return W, np.zeros(len(out))


def _local_constraints(spec, k):
    kind = spec.kind
    if kind == "isotone":
        return isotone_constraints(k)
    if kind == "antitone":
        return antitone_constraints(k)
    if kind in ("concave", "convex"):
        knots = np.arange(k, dtype=float) if spec.knots is None else np.asarray(spec.knots)
        if knots.shape[0] != k:
            raise DimensionMismatch(f"{kind} shape has {knots.shape[0]} knots for {k} parameters")
        return concavity_constraints(knots) if kind == "concave" else convexity_constraints(knots)
    if kind == "nonnegative":
        return nonnegativity_constraints(k)
    if kind == "bound-sum":
        return bound_sum_constraints(k, spec.bound)
    rows, cols = spec.grid_shape
    if rows * cols != k:
        raise DimensionMismatch(f"grid {rows}x{cols} does not match {k} parameters")
    return matrix_partial_order(rows, cols, spec.nonneg_corner)


def shape_constraints(m, shapes):
    """Stack the constraints of one or several :class:`ShapeSpec` over ``m`` parameters."""
    if isinstance(shapes, ShapeSpec):
        shapes = [shapes]
    Ws, es = [], []
    for spec in shapes:
        idx = np.arange(m) if spec.indices is None else np.asarray(spec.indices)
        if idx.size and (idx.min() < 0 or idx.max() >= m):
            raise DimensionMismatch(f"shape indices out of range for m={m}")
        Wl, el = _local_constraints(spec, idx.size)
        W = np.zeros((Wl.shape[0], m))
        W[:, idx] = Wl
        Ws.append(W)
        es.append(el)
    if not Ws:
        return np.zeros((0, m)), np.zeros(0)
    return np.vstack(Ws), np.concatenate(es)


def weighted_mean_fit_problem(y, weights=None, shape=None):
    """Least squares fit of one parameter per observation under shape constraints.

    The design is the identity, so ``A = diag(w)`` and ``b = -w * y``.

    Parameters
    ----------
    y : array_like, shape (n,)
    weights : array_like, shape (n,), optional
        Strictly positive; unit weights by default.
    shape : ShapeSpec or list of ShapeSpec

    Raises
    ------
    NonpositiveWeight
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise DimensionMismatch(f"weights must have length {n}, got {w.shape[0]}")
    if np.any(~(w > 0)):
        raise NonpositiveWeight("weights must be strictly positive")
    shapes = [] if shape is None else ([shape] if isinstance(shape, ShapeSpec) else list(shape))
    W, e = shape_constraints(n, shapes)
    # grid orders contain cycles, and stacked shapes may repeat rows
    dependent = len(shapes) > 1 or any(s.kind == "matrix-partial-order" for s in shapes)
    return least_squares_problem(np.eye(n), y, w, W=W, e=e, allow_dependent=dependent)
