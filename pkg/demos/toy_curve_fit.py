"""Trace the penalty path of a two-parameter line fit with sign and sum bounds.

Run with ``python3 demos/toy_curve_fit.py``.
"""

import numpy as np

from sweeppath import least_squares_problem, solve_path
from sweeppath.path import hitting_time_ratios, initialize_path

X = [[1.0, 0.25], [1.0, 0.5], [1.0, 0.5], [1.0, 0.8]]
y = [0.5, 0.6, 0.7, 1.2]
# intercept >= 0, slope >= 0, intercept + slope <= 1
W = [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]
e = [0.0, 0.0, 1.0]


def main():
    p = least_squares_problem(X, y, W=W, e=e)
    state = initialize_path(p)
    np.set_printoptions(precision=4, suppress=True)
    print("swept tableau at rho = 0:")
    print(state.tableau.entries)
    _, ratios = hitting_time_ratios(state)
    print("hitting-time ratios:", ratios)

    path = solve_path(p)
    for seg in path.segments:
        print(f"rho in [{seg.rho_start:.4f}, {seg.rho_end:.4f})  x0={seg.x_start}  "
              f"slope={seg.slope}  active={list(seg.active)}  df={seg.df}")
    for rho in (0.0, 0.1, 0.2, 1.0):
        print(f"x({rho}) = {path.eval_at(rho)}")


if __name__ == "__main__":
    main()
