"""JSON problem documents and path documents.

A problem document holds exactly one objective source and exactly one
constraint source::

    {
      "A": [[...]], "b": [...], "c": 0.0,          # or
      "X": [[...]], "y": [...], "weights": [...],  # X defaults to the identity
      "constraints": {"V": [[...]], "d": [...], "W": [[...]], "e": [...]},  # or
      "shape": {"kind": "isotone", ...},           # or a list of shapes
      "options": {"sigma2": 0.09, "rho_grid": [0, 0.1], "max_segments": 500,
                  "tolerances": {"residual": 1e-9, "time": 1e-9, "pivot": 1e-12}}
    }

Matrices are row-major nested lists.  Grid shapes are vectorized row-major.
Path documents store every segment's affine data at full double precision,
so ``x(rho)`` can be rebuilt from the file alone.
"""

from dataclasses import fields, replace
import json
import math

import numpy as np

from .errors import DimensionMismatch, ProblemError
from .path import Tolerances
from .problem import least_squares_problem, make_problem
from .shapes import ShapeSpec, shape_constraints

__all__ = [
    "ProblemDocument",
    "parse_problem_document",
    "load_problem_document",
    "path_to_dict",
    "dump_path",
    "eval_path_dict",
]

PATH_FORMAT = "sweeppath-path"
PATH_VERSION = 1


class ProblemDocument:
    """A parsed problem together with its run options."""

    def __init__(self, problem, options, source=None):
        self.problem = problem
        self.options = options
        self.source = source

    @property
    def sigma2(self):
        return self.options.get("sigma2")

    @property
    def rho_grid(self):
        return self.options.get("rho_grid")

    @property
    def max_segments(self):
        return self.options.get("max_segments")

    def tolerances(self, **overrides):
        """Document tolerances with non-``None`` overrides applied."""
        tol = Tolerances()
        known = {f.name for f in fields(Tolerances)}
        given = dict(self.options.get("tolerances") or {})
        unknown = set(given) - known
        if unknown:
            raise ProblemError(f"unknown tolerance names {sorted(unknown)}")
        given.update({k: v for k, v in overrides.items() if v is not None})
        return replace(tol, **given)


def _matrix(doc, key, ncols=None):
    val = doc.get(key)
    if val is None:
        return None
    arr = np.asarray(val, dtype=float)
    if arr.size == 0 and ncols is not None:
        return np.zeros((0, ncols))
    if arr.ndim != 2:
        raise DimensionMismatch(f"{key!r} must be a nested list of rows")
    return arr


def _vector(doc, key):
    val = doc.get(key)
    if val is None:
        return None
    arr = np.asarray(val, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{key!r} must be a flat list")
    return arr


def _shape_specs(raw):
    items = raw if isinstance(raw, list) else [raw]
    specs = []
    for item in items:
        if not isinstance(item, dict) or "kind" not in item:
            raise ProblemError("each shape needs a 'kind'")
        allowed = {"kind", "knots", "grid_shape", "indices", "bound", "nonneg_corner"}
        extra = set(item) - allowed
        if extra:
            raise ProblemError(f"unknown shape fields {sorted(extra)}")
        kw = dict(item)
        if kw.get("grid_shape") is not None:
            kw["grid_shape"] = tuple(int(v) for v in kw["grid_shape"])
        try:
            specs.append(ShapeSpec(**kw))
        except ValueError as exc:
            if isinstance(exc, ProblemError):
                raise
            raise ProblemError(str(exc)) from exc
    return specs


def parse_problem_document(doc, source=None):
    """Validate a decoded JSON document and build the problem.

    Raises
    ------
    ProblemError
        For structural problems, and any validation error of the problem
        itself (dimension, dependence, weights, ...).
    """
    if not isinstance(doc, dict):
        raise ProblemError("problem document must be a JSON object")
    has_qp = "A" in doc or "b" in doc
    has_ls = "y" in doc or "X" in doc
    if has_qp == has_ls:
        raise ProblemError("give exactly one of {A, b, c} or {X, y, weights}")
    has_cons = "constraints" in doc
    has_shape = "shape" in doc
    if has_cons == has_shape:
        raise ProblemError("give exactly one of 'constraints' or 'shape'")
    options = doc.get("options") or {}
    if not isinstance(options, dict):
        raise ProblemError("'options' must be an object")

    if has_qp:
        A = _matrix(doc, "A")
        b = _vector(doc, "b")
        if A is None or b is None:
            raise ProblemError("a quadratic objective needs both 'A' and 'b'")
        m = A.shape[1]
    else:
        y = _vector(doc, "y")
        if y is None:
            raise ProblemError("a least squares objective needs 'y'")
        X = _matrix(doc, "X")
        if X is None:
            X = np.eye(y.shape[0])
        m = X.shape[1]

    if has_cons:
        cons = doc["constraints"] or {}
        if not isinstance(cons, dict):
            raise ProblemError("'constraints' must be an object")
        V, d = _matrix(cons, "V", m), _vector(cons, "d")
        W, e = _matrix(cons, "W", m), _vector(cons, "e")
        dependent = bool(cons.get("allow_dependent", False))
    else:
        specs = _shape_specs(doc["shape"])
        W, e = shape_constraints(m, specs)
        V = d = None
        dependent = len(specs) > 1 or any(s.kind == "matrix-partial-order" for s in specs)

    if has_qp:
        p = make_problem(A, b, doc.get("c", 0.0), V, d, W, e, allow_dependent=dependent)
    else:
        p = least_squares_problem(X, y, _vector(doc, "weights"), V, d, W, e,
                                  allow_dependent=dependent)
    return ProblemDocument(p, options, source)


def load_problem_document(path):
    """Read and parse a problem document from ``path``.

    Raises
    ------
    ProblemError
        Also for unreadable files and malformed JSON.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path} is not valid JSON: {exc}") from exc
    return parse_problem_document(raw, source=str(path))


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def path_to_dict(path, p):
    """Serializable form of a :class:`SolutionPath`."""
    segs = []
    for seg in path.segments:
        segs.append({
            "rho_start": float(seg.rho_start),
            "rho_end": None if math.isinf(seg.rho_end) else float(seg.rho_end),
            "x_start": _floats(seg.x_start),
            "slope": _floats(seg.slope),
            "active": [
                {"index": int(j), "kind": p.constraint_kind(j)[0],
                 "local_index": int(p.constraint_kind(j)[1]), "coef": float(c)}
                for j, c in zip(seg.active, seg.active_coef)
            ],
            "coef_const": _floats(seg.coef_const),
            "coef_inv": _floats(seg.coef_inv),
            "event": seg.event.as_dict(),
            "df": int(seg.df),
        })
    return {
        "format": PATH_FORMAT,
        "version": PATH_VERSION,
        "m": p.m,
        "n_equalities": p.r,
        "n_inequalities": p.s,
        "tolerances": path.tolerances.as_dict(),
        "breakpoints": _floats(path.breakpoints),
        "segments": segs,
        "terminal": {"rho": float(path.terminal_rho), "x": _floats(path.terminal_x)},
        "anomalies": [
            {"rho": a.rho, "candidates": list(a.candidates), "chosen_active": list(a.chosen_active),
             "configurations_tried": a.configurations_tried,
             "valid_configurations": a.valid_configurations, "reason": a.reason}
            for a in path.anomaly_log
        ],
    }


def dump_path(path, p, fh):
    json.dump(path_to_dict(path, p), fh, indent=1)
    fh.write("\n")


def eval_path_dict(doc, rho):
    """Evaluate ``x(rho)`` from a serialized path, without the engine."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    chosen = doc["segments"][0]
    for seg in doc["segments"]:
        if seg["rho_start"] <= rho:
            chosen = seg
    x = np.asarray(chosen["x_start"])
    if chosen["rho_end"] is None:
        return x.copy()
    return x + (rho - chosen["rho_start"]) * np.asarray(chosen["slope"])
