"""Exact penalty path following driven by the sweep operator.

For ``rho >= 0`` let ``x(rho)`` minimize

    1/2 x'Ax + b'x + c + rho * sum_i |v_i'x - d_i| + rho * sum_j (w_j'x - e_j)_+ .

The path starts at the unconstrained minimum ``-A^{-1} b`` and is piecewise
linear in ``rho``.  On each segment the constraints split into an active set
``Z`` (held at equality) and inactive constraints whose subgradient
coefficients are pinned at -1, 0 or 1.  With the tableau

    [ -A   -U'   b ]
    [ -U    0   -c ]
    [  b'  -c'   0 ]

swept on the ``A`` block and on ``Z``, every quantity needed to extend the
path can be read off directly: the solution intercept, its slope, the
constraint residuals and the rates at which they change, and the active
coefficients.  A segment ends when an inactive residual reaches zero
(a hit) or an active coefficient reaches the edge of its subdifferential
(an escape).  Simultaneous events, and constraints that are tight at the
unconstrained minimum, are settled by trying every active/inactive
configuration of the constraints involved.

Constraint ``j`` (a row of ``U = [V; W]``) lives at tableau index ``m + j``.
The ``status`` array records ``-1`` (residual negative, N), ``0`` (active, Z)
or ``+1`` (residual positive, P) for each constraint.
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import product
import logging
import math

import numpy as np

from .errors import (
    AmbiguousConfiguration,
    MaxSegmentsExceeded,
    NoFurtherEvents,
    NotPositiveDefinite,
    NoValidConfiguration,
    PathBreakdown,
    PivotTooSmall,
)
from .sweep import SymmetricTableau

__all__ = [
    "Tolerances",
    "IndexSets",
    "Event",
    "PathSegment",
    "AnomalyRecord",
    "SolutionPath",
    "PathState",
    "build_initial_tableau",
    "initialize_path",
    "hitting_time",
    "hitting_time_ratios",
    "escape_times",
    "coefficient_update",
    "advance_segment",
    "resolve_configuration",
    "solve_path",
    "eval_at",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds of the path engine.

    ``residual`` is scaled by ``1 + max|[d; e]|`` and ``time`` by ``1 + rho``.
    ``dependence`` is the relative size below which a constraint pivot is
    declared linearly dependent on the active rows.  ``rate`` is relative to
    the largest rate any residual could have on the current segment.
    """

    residual: float = 1e-9
    time: float = 1e-9
    pivot: float = 1e-12
    denom: float = 1e-12
    coeff: float = 1e-8
    dependence: float = 1e-10
    rate: float = 1e-9
    max_segments: int = None

    def as_dict(self):
        return {
            "residual": self.residual,
            "time": self.time,
            "pivot": self.pivot,
            "denom": self.denom,
            "coeff": self.coeff,
            "dependence": self.dependence,
            "rate": self.rate,
            "max_segments": self.max_segments,
        }


SET_NAMES = {(True, -1): "N_E", (True, 0): "Z_E", (True, 1): "P_E",
             (False, -1): "N_I", (False, 0): "Z_I", (False, 1): "P_I"}


@dataclass(frozen=True)
class IndexSets:
    """The six constraint classes, as local (0-based) indices.

    Equality indices run over rows of ``V`` and inequality indices over
    rows of ``W``.
    """

    N_E: tuple
    Z_E: tuple
    P_E: tuple
    N_I: tuple
    Z_I: tuple
    P_I: tuple

    @classmethod
    def from_status(cls, status, r):
        eq, ineq = status[:r], status[r:]

        def pick(arr, v):
            return tuple(int(i) for i in np.flatnonzero(arr == v))

        return cls(pick(eq, -1), pick(eq, 0), pick(eq, 1),
                   pick(ineq, -1), pick(ineq, 0), pick(ineq, 1))

    @property
    def Z(self):
        return len(self.Z_E) + len(self.Z_I)


@dataclass(frozen=True)
class Event:
    """What ends a segment.

    ``kind`` is ``"hit"``, ``"escape"``, ``"anomaly"`` (several constraints
    settled together) or ``"terminal"``.  ``destinations`` names the class
    each listed constraint moves into.
    """

    kind: str
    constraints: tuple = ()
    destinations: tuple = ()

    def as_dict(self):
        return {"kind": self.kind,
                "constraints": [int(j) for j in self.constraints],
                "destinations": list(self.destinations)}


@dataclass(frozen=True, eq=False)
class PathSegment:
    """One linear piece ``x(rho) = x_start + (rho - rho_start) * slope``.

    Valid on ``[rho_start, rho_end)``; the terminal segment has
    ``rho_end = inf`` and zero slope.  ``active`` holds global constraint
    indices and ``active_coef`` their coefficients at ``rho_start``.  The
    full coefficient vector on the segment is ``coef_const + coef_inv / rho``
    (``coef_inv`` vanishes off the active set).
    """

    rho_start: float
    rho_end: float
    x_start: np.ndarray
    slope: np.ndarray
    active: tuple
    active_coef: np.ndarray
    event: Event
    df: int
    coef_const: np.ndarray = None
    coef_inv: np.ndarray = None

    def x_at(self, rho):
        return self.x_start + (rho - self.rho_start) * self.slope

    def coef_at(self, rho):
        """Subgradient coefficients ``(s; t)`` stacked, at ``rho > 0``."""
        if not rho > 0:
            raise ValueError("coefficients are only defined for rho > 0")
        return self.coef_const + self.coef_inv / rho

    @property
    def x_end(self):
        if math.isinf(self.rho_end):
            return self.x_start.copy()
        return self.x_at(self.rho_end)


@dataclass(frozen=True)
class AnomalyRecord:
    rho: float
    candidates: tuple
    chosen_active: tuple
    configurations_tried: int
    valid_configurations: int
    reason: str


@dataclass(frozen=True, eq=False)
class SolutionPath:
    segments: tuple
    terminal_x: np.ndarray
    terminal_rho: float
    anomaly_log: tuple = ()
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def breakpoints(self):
        return np.array([seg.rho_start for seg in self.segments])

    def segment_at(self, rho):
        if rho < 0:
            raise ValueError("rho must be nonnegative")
        starts = [seg.rho_start for seg in self.segments]
        return self.segments[max(bisect_right(starts, rho) - 1, 0)]

    def eval_at(self, rho):
        seg = self.segment_at(rho)
        if math.isinf(seg.rho_end):
            return seg.x_start.copy()
        return seg.x_at(rho)

    def active_at(self, rho):
        return self.segment_at(rho).active

    def df_at(self, rho):
        return self.segment_at(rho).df

    def coef_at(self, rho):
        return self.segment_at(rho).coef_at(rho)


def eval_at(path, rho):
    """Solution ``x(rho)`` read off the piecewise linear path."""
    return path.eval_at(rho)


def build_initial_tableau(p, pivot_rtol=1e-12):
    """Bordered tableau ``[[-A, -U', b], [-U, 0, -c], [b', -c', 0]]``."""
    m, n = p.m, p.n_constraints
    N = m + n + 1
    T = np.zeros((N, N))
    U = p.U
    rhs = p.rhs
    T[:m, :m] = -p.A
    T[:m, m:m + n] = -U.T
    T[m:m + n, :m] = -U
    T[:m, -1] = p.b
    T[-1, :m] = p.b
    T[m:m + n, -1] = -rhs
    T[-1, m:m + n] = -rhs
    return SymmetricTableau(T, pivot_rtol=pivot_rtol, check_symmetry=False)


def _bounds(is_eq):
    lo = np.where(is_eq, -1.0, 0.0)
    return lo, np.ones_like(lo)


def _coef_for_side(is_eq, side):
    if side > 0:
        return 1.0
    return -1.0 if is_eq else 0.0


def _side_for_coef(is_eq, value, tol):
    """Inactive side a coefficient sitting on a boundary belongs to."""
    sides = []
    if value <= (-1.0 if is_eq else 0.0) + tol:
        sides.append(-1)
    if value >= 1.0 - tol:
        sides.append(1)
    return sides


@dataclass(frozen=True)
class _SegmentData:
    act: np.ndarray
    inact: np.ndarray
    x_int: np.ndarray
    slope: np.ndarray
    res_int: np.ndarray
    rate: np.ndarray
    g: np.ndarray
    h: np.ndarray
    u_norm: float


@dataclass(eq=False)
class PathState:
    """Mutable engine state at ``rho``.

    ``tableau`` is swept on the ``A`` block and on the active constraints.
    ``coef`` holds every constraint's subgradient coefficient: pinned values
    for inactive constraints and the current ``r_Z`` for active ones.
    """

    problem: object
    tableau: SymmetricTableau
    rho: float
    x: np.ndarray
    status: np.ndarray
    coef: np.ndarray
    tol: Tolerances
    ainv_scale: float
    ref_diag: np.ndarray
    anomalies: list = field(default_factory=list)

    @property
    def m(self):
        return self.problem.m

    @property
    def active(self):
        return np.flatnonzero(self.status == 0)

    @property
    def inactive(self):
        return np.flatnonzero(self.status != 0)

    @property
    def r_Z(self):
        return self.coef[self.status == 0].copy()

    @property
    def sets(self):
        return IndexSets.from_status(self.status, self.problem.r)

    @property
    def df(self):
        return self.m - int(np.sum(self.status == 0))

    @property
    def is_terminal(self):
        """No inactive constraint carries a nonzero coefficient."""
        inact = self.status != 0
        return not np.any(self.coef[inact] != 0.0)

    def residual_tolerance(self):
        rhs = self.problem.rhs
        return self.tol.residual * (1.0 + (float(np.max(np.abs(rhs))) if rhs.size else 0.0))

    def segment_data(self):
        p = self.problem
        m, n = p.m, p.n_constraints
        T = self.tableau.entries
        act = np.flatnonzero(self.status == 0)
        inact = np.flatnonzero(self.status != 0)
        rbar = self.coef[inact]
        if inact.size:
            v = T[:, m + inact] @ rbar
            u_norm = float(np.linalg.norm(p.U[inact].T @ rbar))
        else:
            v = np.zeros(T.shape[0])
            u_norm = 0.0
        last = T[:, m + n]
        return _SegmentData(
            act=act,
            inact=inact,
            x_int=last[:m].copy(),
            slope=-v[:m],
            res_int=last[m + inact].copy(),
            rate=v[m + inact].copy(),
            g=last[m + act].copy(),
            h=v[m + act].copy(),
            u_norm=u_norm,
        )

    def tableau_x(self):
        """Solution at ``self.rho`` recomputed from the tableau."""
        q = self.segment_data()
        return q.x_int + self.rho * q.slope

    def blocks(self):
        """``(P, Q, R)`` of the inverse KKT matrix for the current active set."""
        m = self.m
        act = m + self.active
        T = self.tableau.entries
        return T[:m, :m].copy(), T[:m][:, act].copy(), T[np.ix_(act, act)].copy()


def _rate_tolerance(state, q):
    row_norms = np.linalg.norm(state.problem.U[q.inact], axis=1)
    return np.maximum(state.tol.rate * row_norms * state.ainv_scale * q.u_norm, 1e-300)


def _active_coefficients(q, rho):
    if rho > 0:
        return q.g / rho - q.h
    return -q.h


@dataclass(frozen=True)
class _Assessment:
    violation: float
    x: np.ndarray
    slope: np.ndarray
    r_active: np.ndarray
    n_active: int

    @property
    def valid(self):
        return self.violation <= 1.0


def _assess(state, rho):
    """Check that the current configuration extends the path past ``rho``.

    Violations are measured in units of the relevant tolerance, so the
    configuration is acceptable when the returned maximum is at most 1.
    """
    p, tol = state.problem, state.tol
    q = state.segment_data()
    worst = -np.inf
    is_eq = p.is_equality

    r = _active_coefficients(q, rho)
    if q.act.size:
        lo, hi = _bounds(is_eq[q.act])
        ct = tol.coeff
        worst = max(worst, float(np.max(np.maximum(lo - r, r - hi))) / ct)
        limit = -q.h
        near_lo = r <= lo + ct
        near_hi = r >= hi - ct
        if np.any(near_lo):
            worst = max(worst, float(np.max((lo - limit)[near_lo])) / ct)
        if np.any(near_hi):
            worst = max(worst, float(np.max((limit - hi)[near_hi])) / ct)

    if q.inact.size:
        rt = state.residual_tolerance()
        side = state.status[q.inact].astype(float)
        res = q.res_int - rho * q.rate
        worst = max(worst, float(np.max(-side * res)) / rt)
        tight = np.abs(res) <= rt
        if np.any(tight):
            # d res / d rho = -rate
            rtol = _rate_tolerance(state, q)
            worst = max(worst, float(np.max((side * q.rate / rtol)[tight])))

    x = q.x_int + rho * q.slope
    return _Assessment(worst, x, q.slope, r, int(q.act.size))


def _dependent(state, j):
    """True when constraint ``j`` lies (numerically) in the span of the active rows."""
    k = state.m + j
    return state.tableau.entries[k, k] <= state.tol.dependence * state.ref_diag[j]


def _set_swept(state, j, want):
    """Bring constraint ``j`` into the requested sweep state; False if impossible."""
    k = state.m + j
    if bool(state.tableau.swept[k]) == want:
        return True
    if want:
        if _dependent(state, j):
            return False
        try:
            state.tableau.sweep(k)
        except PivotTooSmall:
            return False
    else:
        state.tableau.inverse_sweep(k)
    return True


def _apply_mask(state, cands, want):
    """Set the sweep state of several constraints; False if any sweep is impossible.

    Inverse sweeps go first so that a constraint is never judged dependent
    on one that is about to leave the active set.
    """
    ok = True
    for j, w in zip(cands, want):
        if not w:
            _set_swept(state, j, False)
    for j, w in zip(cands, want):
        if w and not _set_swept(state, j, True):
            ok = False
    return ok


def initialize_path(p, tol=None):
    """Sweep the ``A`` block and classify the constraints at ``rho = 0``.

    Constraints whose residual vanishes at the unconstrained minimum are
    handed to :func:`resolve_configuration`, which picks the active set that
    extends the path for small ``rho``.

    Raises
    ------
    NotPositiveDefinite
        If ``A`` cannot be completely swept with positive pivots.
    """
    tol = tol or Tolerances()
    m, n = p.m, p.n_constraints
    tab = build_initial_tableau(p, pivot_rtol=tol.pivot)
    for k in range(m):
        # diagonal of -A must stay negative until swept
        akk = tab.entries[k, k]
        if not -akk > tab.pivot_tolerance(k):
            raise NotPositiveDefinite(f"diagonal entry {k} equals {-akk:.3e} just before sweeping")
        tab.sweep(k)
    T = tab.entries
    ainv_scale = float(np.max(np.abs(T[:m, :m]))) if m else 1.0
    ref_diag = np.abs(np.diag(T)[m:m + n]).copy()

    is_eq = p.is_equality
    res0 = T[m:m + n, -1].copy()
    state = PathState(
        problem=p, tableau=tab, rho=0.0, x=T[:m, -1].copy(),
        status=np.zeros(n, dtype=int), coef=np.zeros(n), tol=tol,
        ainv_scale=ainv_scale, ref_diag=ref_diag,
    )
    rt = state.residual_tolerance()
    status = np.where(res0 < -rt, -1, np.where(res0 > rt, 1, 0))
    tight = np.flatnonzero(status == 0)
    # provisionally inactive; the configuration search decides
    status[tight] = -1
    state.status = status.astype(int)
    state.coef = np.array([_coef_for_side(is_eq[j], status[j]) for j in range(n)], dtype=float)
    if tight.size:
        resolve_configuration(state, tight, reason="tight at rho=0")
    return state


def _hit_times(state, q):
    """Hitting times for all inactive constraints (``nan`` where none)."""
    if not q.inact.size:
        return np.empty(0)
    tol = state.tol
    rho0 = state.rho
    side = state.status[q.inact]
    rate = q.rate
    rtol = _rate_tolerance(state, q)
    usable = (np.abs(rate) > tol.denom) & (np.abs(rate) > rtol) & (side * rate > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(usable, q.res_int / np.where(usable, rate, 1.0), np.nan)
    t[~(t > rho0 + tol.time * (1.0 + rho0))] = np.nan
    return t


def _escape_times(state, q):
    """Escape times and boundary values for all active constraints."""
    if not q.act.size or state.rho <= 0:
        nan = np.full(q.act.size, np.nan)
        return nan, nan
    tol = state.tol
    rho0 = state.rho
    is_eq = state.problem.is_equality[q.act]
    lo, hi = _bounds(is_eq)
    r0 = state.coef[q.act]
    h = q.h
    limit = -h
    drift = r0 + h  # positive: coefficient decreasing in rho
    times = np.full(q.act.size, np.nan)
    beta = np.full(q.act.size, np.nan)
    down = (drift > 0) & (limit < lo)
    up = (drift < 0) & (limit > hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        times = np.where(down, q.g / (h + lo), times)
        times = np.where(up, q.g / (h + hi), times)
    beta = np.where(down, lo, np.where(up, hi, beta))
    bad = ~(times > rho0 + tol.time * (1.0 + rho0))
    times[bad] = np.nan
    return times, beta


def hitting_time(state, j):
    """Value of ``rho`` at which inactive constraint ``j`` becomes tight.

    Returns ``None`` when the residual never reaches zero later on the
    current segment.
    """
    if state.status[j] == 0:
        raise ValueError(f"constraint {j} is active")
    q = state.segment_data()
    t = _hit_times(state, q)[int(np.searchsorted(q.inact, j))]
    return None if np.isnan(t) else float(t)


def hitting_time_ratios(state):
    """Unfiltered ratios ``residual intercept / rate`` for every inactive constraint.

    Returns ``(indices, ratios)``; a ratio is ``nan`` where the rate
    vanishes.  Past or negative ratios are included, unlike
    :func:`hitting_time`.
    """
    q = state.segment_data()
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(np.abs(q.rate) > state.tol.denom, q.res_int / q.rate, np.nan)
    return q.inact.copy(), ratios


def escape_times(state, i):
    """Candidate times at which active constraint ``i`` leaves the active set.

    At most one time is pertinent: the coefficient moves monotonically
    toward ``-[Q'u]_i`` and can only cross the boundary on that side.
    """
    if state.status[i] != 0:
        raise ValueError(f"constraint {i} is not active")
    q = state.segment_data()
    times, _ = _escape_times(state, q)
    t = times[int(np.searchsorted(q.act, i))]
    return [] if np.isnan(t) else [float(t)]


def coefficient_update(state, rho_new):
    """Active coefficients at ``rho_new`` on the current segment.

    ``r(rho) = (rho0/rho) r(rho0) - (1 - rho0/rho) Q'u``; from ``rho0 = 0``
    the coefficients sit at their limit ``-Q'u`` from the start.
    """
    q = state.segment_data()
    r0 = state.coef[q.act]
    if state.rho <= 0:
        return -q.h
    ratio = state.rho / rho_new
    return ratio * r0 - (1.0 - ratio) * q.h


def _ambiguous(state, q):
    """Tight inactive constraints and active ones parked on a boundary."""
    out = set()
    if q.inact.size:
        res = q.res_int - state.rho * q.rate
        out.update(int(j) for j in q.inact[np.abs(res) <= state.residual_tolerance()])
    if q.act.size:
        lo, hi = _bounds(state.problem.is_equality[q.act])
        r = state.coef[q.act]
        ct = state.tol.coeff
        out.update(int(j) for j in q.act[(r <= lo + ct) | (r >= hi - ct)])
    return out


def _commit(state, rho, assessment):
    act = state.active
    lo, hi = _bounds(state.problem.is_equality[act])
    state.coef[act] = np.clip(assessment.r_active, lo, hi)
    state.x = assessment.x
    state.rho = rho


def _destination(state, j):
    return SET_NAMES[(bool(state.problem.is_equality[j]), int(state.status[j]))]


def resolve_configuration(state, candidates, reason="simultaneous events"):
    """Choose active/inactive states for ambiguous constraints at ``state.rho``.

    Every subset of ``candidates`` is tried as the active part, visiting the
    subsets in reflected Gray code order so that consecutive trials differ
    by one sweep or inverse sweep.  A candidate left inactive keeps the
    coefficient it had (a hit constraint returns to its side, an active one
    leaves through the boundary it sits on); at ``rho = 0`` no coefficient
    is fixed yet and both sides are tried.  The accepted configuration is the
    one whose active coefficients stay inside their subdifferentials and
    whose tight inactive residuals move toward their own side.

    Raises
    ------
    NoValidConfiguration
        If no configuration passes.
    AmbiguousConfiguration
        If configurations with different path directions pass.
    """
    p, tol = state.problem, state.tol
    is_eq = p.is_equality
    rho = state.rho
    cands = sorted({int(j) for j in candidates})
    a = len(cands)
    orig_status = state.status.copy()
    orig_coef = state.coef.copy()
    orig_swept = {j: bool(state.tableau.swept[state.m + j]) for j in cands}

    options = {}
    for j in cands:
        if rho <= 0:
            options[j] = (-1, 1)
        elif orig_status[j] != 0:
            options[j] = (int(orig_status[j]),)
        else:
            options[j] = tuple(_side_for_coef(is_eq[j], orig_coef[j], tol.coeff))

    start_mask = sum(1 << i for i, j in enumerate(cands) if orig_status[j] == 0)
    trials = []
    tried = 0
    for step in range(1 << a):
        mask = start_mask ^ (step ^ (step >> 1))
        want = [(mask >> i) & 1 == 1 for i in range(a)]
        if not _apply_mask(state, cands, want):
            continue
        inactive_c = [j for j, w in zip(cands, want) if not w]
        for sides in product(*(options[j] for j in inactive_c)):
            for j, w in zip(cands, want):
                if w:
                    state.status[j] = 0
                    state.coef[j] = orig_coef[j]
            for j, sd in zip(inactive_c, sides):
                state.status[j] = sd
                state.coef[j] = _coef_for_side(is_eq[j], sd)
            tried += 1
            trials.append((_assess(state, rho), mask, dict(zip(inactive_c, sides))))

    valid = [t for t in trials if t[0].valid]
    if not valid:
        _apply_mask(state, cands, [orig_swept[j] for j in cands])
        state.status, state.coef = orig_status, orig_coef
        best = min((t[0].violation for t in trials), default=np.inf)
        raise NoValidConfiguration(
            f"at rho={rho:.12g}: none of {tried} configurations of constraints "
            f"{cands} is consistent (smallest violation {best:.3g} tolerance units)"
        )

    ref = min(valid, key=lambda t: t[0].violation)[0]
    scale = state.ainv_scale * max(1.0, float(np.max(np.linalg.norm(p.U, axis=1))))
    for t in valid:
        if not np.allclose(t[0].slope, ref.slope, rtol=1e-7, atol=1e-9 * scale):
            raise AmbiguousConfiguration(
                f"at rho={rho:.12g}: {len(valid)} configurations of constraints {cands} "
                "pass with different path directions; tighten the tolerances"
            )
    # equivalent directions: least penalty mass left on inactive constraints,
    # then as many active constraints as possible
    def inactive_mass(t):
        return sum(abs(_coef_for_side(is_eq[j], sd)) for j, sd in t[2].items())

    chosen = max(valid, key=lambda t: (-inactive_mass(t), t[0].n_active, -t[0].violation))
    assessment, mask, sides = chosen
    want = [(mask >> i) & 1 == 1 for i in range(a)]
    if not _apply_mask(state, cands, want):
        raise PathBreakdown(f"at rho={rho:.12g}: accepted configuration could not be swept")
    for j, w in zip(cands, want):
        if w:
            state.status[j] = 0
            state.coef[j] = orig_coef[j]
        else:
            state.status[j] = sides[j]
            state.coef[j] = _coef_for_side(is_eq[j], sides[j])
    _commit(state, rho, assessment)
    record = AnomalyRecord(
        rho=float(rho),
        candidates=tuple(cands),
        chosen_active=tuple(j for i, j in enumerate(cands) if (mask >> i) & 1),
        configurations_tried=tried,
        valid_configurations=len(valid),
        reason=reason,
    )
    state.anomalies.append(record)
    log.debug("resolved %s", record)
    return state


def _apply_single(state, j, kind, beta):
    """Perform a lone hit or escape; returns an undo closure or None if impossible."""
    is_eq = state.problem.is_equality[j]
    old = (int(state.status[j]), float(state.coef[j]))
    k = state.m + j
    if kind == "hit":
        if not _set_swept(state, j, True):
            return None
        state.status[j] = 0
    else:
        state.tableau.inverse_sweep(k)
        side = -1 if beta == (-1.0 if is_eq else 0.0) else 1
        state.status[j] = side
        state.coef[j] = _coef_for_side(is_eq, side)

    def undo():
        state.tableau.toggle(k)
        state.status[j], state.coef[j] = old

    return undo


def advance_segment(state):
    """Follow the current segment to its first event and handle the event.

    The state is updated in place and also returned.

    Returns
    -------
    segment : PathSegment
        The segment that just ended.
    state : PathState
        The state at the event, configured for the next segment.

    Raises
    ------
    NoFurtherEvents
        If nothing ever ends the current segment.
    """
    q = state.segment_data()
    hits = _hit_times(state, q)
    esc, beta = _escape_times(state, q)
    events = [(float(t), int(j), "hit", None) for t, j in zip(hits, q.inact) if not np.isnan(t)]
    events += [(float(t), int(j), "escape", float(bv))
               for t, j, bv in zip(esc, q.act, beta) if not np.isnan(t)]
    if not events:
        raise NoFurtherEvents(f"no event after rho={state.rho:.12g}")

    rho0 = state.rho
    rho_k = min(ev[0] for ev in events)
    group = [ev for ev in events if ev[0] <= rho_k + state.tol.time * (1.0 + rho_k)]
    m = state.m
    act = q.act
    seg_fields = dict(
        rho_start=rho0, rho_end=rho_k, x_start=state.x.copy(), slope=q.slope.copy(),
        active=tuple(int(j) for j in act), active_coef=state.coef[act].copy(),
        df=m - int(act.size), **_coef_form(state, q),
    )

    # slide to rho_k in the old configuration
    lo, hi = _bounds(state.problem.is_equality[act])
    state.rho = rho_k
    state.x = q.x_int + rho_k * q.slope
    state.coef[act] = np.clip(_active_coefficients(q, rho_k), lo, hi)
    for _, j, kind, bv in group:
        if kind == "escape":
            state.coef[j] = bv

    event = None
    if len(group) == 1:
        _, j, kind, bv = group[0]
        undo = _apply_single(state, j, kind, bv)
        if undo is not None:
            assessment = _assess(state, rho_k)
            if assessment.valid:
                _commit(state, rho_k, assessment)
                event = Event(kind, (j,), (_destination(state, j),))
            else:
                undo()
    if event is None:
        cands = {ev[1] for ev in group} | _ambiguous(state, state.segment_data())
        reason = "simultaneous events" if len(group) > 1 else "inconsistent single event"
        resolve_configuration(state, cands, reason=reason)
        cands = state.anomalies[-1].candidates
        event = Event("anomaly", cands, tuple(_destination(state, j) for j in cands))
    return PathSegment(event=event, **seg_fields), state


def _coef_form(state, q):
    const = state.coef.copy()
    inv = np.zeros_like(const)
    const[q.act] = -q.h
    inv[q.act] = q.g
    return {"coef_const": const, "coef_inv": inv}


def _terminal_segment(state):
    q = state.segment_data()
    act = q.act
    return PathSegment(
        rho_start=state.rho, rho_end=math.inf, x_start=state.x.copy(), slope=q.slope.copy(),
        active=tuple(int(j) for j in act), active_coef=state.coef[act].copy(),
        event=Event("terminal"), df=state.m - int(act.size), **_coef_form(state, q),
    )


def solve_path(p, tol=None, max_segments=None):
    """Trace the whole exact penalty path of ``p``.

    Parameters
    ----------
    p : QpProblem
    tol : Tolerances, optional
    max_segments : int, optional
        Cap on the number of finite segments; defaults to ``tol.max_segments``
        or ``50 * (r + s)``.

    Returns
    -------
    SolutionPath
        Its last segment starts at the penalty beyond which ``x(rho)`` no
        longer changes; ``terminal_x`` is the constrained minimizer.
    """
    tol = tol or Tolerances()
    cap = max_segments or tol.max_segments or max(50 * p.n_constraints, 1)
    state = initialize_path(p, tol)
    segments = []
    while not state.is_terminal:
        if len(segments) >= cap:
            raise MaxSegmentsExceeded(f"path still open after {cap} segments at rho={state.rho:.6g}")
        try:
            seg, state = advance_segment(state)
        except NoFurtherEvents as exc:
            raise PathBreakdown(
                f"no further events at rho={state.rho:.6g} although penalty terms remain"
            ) from exc
        segments.append(seg)
    last = _terminal_segment(state)
    assert not np.any(last.slope), "terminal segment must be flat"
    segments.append(last)
    return SolutionPath(
        segments=tuple(segments),
        terminal_x=last.x_start.copy(),
        terminal_rho=float(state.rho),
        anomaly_log=tuple(state.anomalies),
        tolerances=tol,
    )
