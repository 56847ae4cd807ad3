"""Bivariate monotone fit of a noisy 4 x 5 table, increasing along rows and columns."""

import numpy as np

from sweeppath import ShapeSpec, solve_path, weighted_mean_fit_problem
from sweeppath.oracle import solve_constrained_enumeration


def main(seed=1):
    rng = np.random.default_rng(seed)
    rows, cols = 4, 5
    truth = np.add.outer(np.arange(rows), np.arange(cols)) / 4.0
    y = truth + 0.6 * rng.standard_normal((rows, cols))
    counts = rng.integers(1, 6, (rows, cols)).astype(float)
    # row-major vectorization
    spec = ShapeSpec("matrix-partial-order", grid_shape=(rows, cols), nonneg_corner=True)
    p = weighted_mean_fit_problem(y.ravel(), counts.ravel(), spec)
    path = solve_path(p)
    fit = path.terminal_x.reshape(rows, cols)
    np.set_printoptions(precision=3, suppress=True)
    print(f"{p.s} order constraints, {len(path.segments)} segments")
    print("data:\n", y)
    print("fit:\n", fit)
    print("row and column differences all >= 0:",
          bool(np.all(np.diff(fit, axis=1) >= -1e-12) and np.all(np.diff(fit, axis=0) >= -1e-12)))
    if p.s <= 20:
        print("max gap to enumeration:", np.max(np.abs(path.terminal_x - solve_constrained_enumeration(p).x)))


if __name__ == "__main__":
    main()
