"""Concave regression on simulated data and the C_p curve along its path.

Usage: ``python3 demos/concave_cp.py [seed]``.  Prints a coarse C_p table
and the penalty with the smallest C_p.
"""

import sys
import time

import numpy as np

from sweeppath import ShapeSpec, solve_path, weighted_mean_fit_problem
from sweeppath.selection import cp_profile

SIGMA = 0.3


def main(seed=0):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, 100))
    y = 4 * x * (1 - x) + SIGMA * rng.standard_normal(100)
    p = weighted_mean_fit_problem(y, None, ShapeSpec("concave", knots=x))

    t0 = time.perf_counter()
    path = solve_path(p)
    print(f"{len(path.segments)} segments in {time.perf_counter() - t0:.3f} s, "
          f"terminal rho {path.terminal_rho:.4f}")

    grid = np.unique(np.concatenate([np.linspace(0, path.terminal_rho, 200), path.breakpoints]))
    rows = cp_profile(path, p, grid, SIGMA ** 2)
    for rho, rss, df, cp in rows[:: max(1, len(rows) // 15)]:
        print(f"rho={rho:8.4f}  rss={rss:8.4f}  df={df:3d}  cp={cp:.4f}")
    best = min(rows, key=lambda r: r[3])
    print(f"smallest C_p {best[3]:.4f} at rho={best[0]:.4f} with df={best[2]}")
    truth = 4 * x * (1 - x)
    fit = path.eval_at(best[0])
    print(f"mean squared error vs truth: fit {np.mean((fit - truth) ** 2):.4f}, "
          f"raw data {np.mean((y - truth) ** 2):.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
