"""Isotone fit of five observed frequencies, checked against pool adjacent violators."""

import numpy as np

from sweeppath import ShapeSpec, solve_path, weighted_mean_fit_problem
from sweeppath.oracle import pava_isotone

FREQ = [0.3752, 0.3202, 0.2775, 0.3043, 0.5327]


def main():
    shapes = [ShapeSpec("nonnegative", indices=[0]), ShapeSpec("isotone")]
    p = weighted_mean_fit_problem(FREQ, None, shapes)
    path = solve_path(p)
    np.set_printoptions(precision=4, suppress=True)
    print(f"{len(path.segments)} segments, breakpoints {path.breakpoints}")
    # coefficient trajectories at a few penalties
    for rho in np.linspace(0.0, path.terminal_rho, 6):
        print(f"rho={rho:.4f}  theta={path.eval_at(rho)}")
    print("terminal:", path.terminal_x)
    print("pava:    ", pava_isotone(FREQ))


if __name__ == "__main__":
    main()
