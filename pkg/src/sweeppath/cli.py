"""Command line interface: ``sweeppath {solve,profile,eval} INPUT``.

Exit status is 0 on success, 1 for unreadable or invalid input and 2 when
the path engine fails.
"""

import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from .errors import ProblemError, SolverError
from .io import dump_path, load_problem_document
from .path import solve_path
from .selection import cp_profile, estimate_sigma2

log = logging.getLogger("sweeppath")

DEFAULT_GRID_POINTS = 100


def _add_common(sp):
    sp.add_argument("input", help="problem document (JSON)")
    sp.add_argument("--output", "-o", help="write here instead of stdout")
    sp.add_argument("--max-segments", type=int, help="cap on the number of path segments")
    sp.add_argument("--tol-residual", type=float, help="relative residual tolerance")
    sp.add_argument("--tol-time", type=float, help="relative event-time tolerance")
    sp.add_argument("--tol-pivot", type=float, help="relative pivot tolerance")
    sp.add_argument("--verbose", "-v", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sweeppath",
        description="Exact penalty solution paths for convex quadratic programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="trace the path and write it as JSON")
    _add_common(sp)

    sp = sub.add_parser("profile", help="RSS, df and C_p over a penalty grid as CSV")
    _add_common(sp)
    sp.add_argument("--grid", help="comma separated penalties, or a point count "
                                   "(evenly spaced up to the last breakpoint, breakpoints added); "
                                   "a bare 0 is the single penalty 0")
    sp.add_argument("--sigma2", type=float, help="noise variance for C_p")

    sp = sub.add_parser("eval", help="print x(rho) and the active set")
    _add_common(sp)
    sp.add_argument("--rho", type=float, required=True)
    return parser


def parse_grid(text):
    """``"0,0.1,0.2"`` -> list of floats; ``"50"`` -> the integer 50.

    A bare ``"0"`` means the single penalty 0, not an empty grid.
    """
    text = text.strip()
    if "," not in text:
        try:
            k = int(text)
        except ValueError:
            pass
        else:
            return [0.0] if k == 0 else k
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ProblemError(f"cannot parse grid {text!r}") from exc
    if not vals or any(v < 0 for v in vals):
        raise ProblemError("grid penalties must be nonnegative and nonempty")
    return vals


def resolve_grid(grid, path):
    """Expand a point count into an evenly spaced grid merged with the breakpoints."""
    if isinstance(grid, list):
        return grid
    if grid < 1:
        raise ProblemError("grid point count must be positive")
    top = path.terminal_rho
    base = np.linspace(0.0, top, grid) if top > 0 else np.zeros(1)
    return sorted(set(base.tolist()) | set(path.breakpoints.tolist()))


def _solve(doc, args):
    tol = doc.tolerances(residual=args.tol_residual, time=args.tol_time, pivot=args.tol_pivot)
    cap = args.max_segments or doc.max_segments
    t0 = time.perf_counter()
    path = solve_path(doc.problem, tol=tol, max_segments=cap)
    log.info("path with %d segments in %.3f s", len(path.segments), time.perf_counter() - t0)
    return path


def cmd_solve(args, out):
    doc = load_problem_document(args.input)
    path = _solve(doc, args)
    dump_path(path, doc.problem, out)


def cmd_profile(args, out):
    doc = load_problem_document(args.input)
    p = doc.problem
    if not p.has_provenance:
        raise ProblemError("profile needs a least squares document (X, y, weights)")
    path = _solve(doc, args)
    if args.grid is not None:
        grid = parse_grid(args.grid)
    elif doc.rho_grid is not None:
        grid = doc.rho_grid if isinstance(doc.rho_grid, int) else [float(v) for v in doc.rho_grid]
    else:
        grid = DEFAULT_GRID_POINTS
    sigma2 = args.sigma2 if args.sigma2 is not None else doc.sigma2
    if sigma2 is None:
        try:
            sigma2 = estimate_sigma2(p, path)
        except ValueError as exc:
            raise ProblemError(f"{exc}; pass --sigma2") from exc
    rows = cp_profile(path, p, resolve_grid(grid, path), sigma2)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rho", "rss", "df", "cp"])
    for rho, rss, df, cp in rows:
        writer.writerow([repr(float(rho)), repr(float(rss)), int(df), repr(float(cp))])


def cmd_eval(args, out):
    if args.rho < 0:
        raise ProblemError("--rho must be nonnegative")
    doc = load_problem_document(args.input)
    path = _solve(doc, args)
    seg = path.segment_at(args.rho)
    p = doc.problem
    result = {
        "rho": args.rho,
        "x": [float(v) for v in path.eval_at(args.rho)],
        "active": [{"index": int(j), "kind": p.constraint_kind(j)[0],
                    "local_index": int(p.constraint_kind(j)[1])} for j in seg.active],
        "df": int(seg.df),
    }
    json.dump(result, out, indent=1)
    out.write("\n")


COMMANDS = {"solve": cmd_solve, "profile": cmd_profile, "eval": cmd_eval}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    out = None
    try:
        out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
        COMMANDS[args.command](args, out)
    except ProblemError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not None and out is not sys.stdout:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
