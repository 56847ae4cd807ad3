import numpy as np
import pytest

from sweeppath import make_problem, penalized_objective
from sweeppath.errors import Infeasible
from sweeppath.oracle import (
    kkt_residual,
    minimize_penalized_grid,
    pava_isotone,
    penalized_kkt_violation,
    solve_constrained_enumeration,
)

from problem_factory import random_problem, toy_problem


def test_enumeration_toy():
    sol = solve_constrained_enumeration(toy_problem())
    np.testing.assert_allclose(sol.x, [0.3787, 0.6213], atol=1e-4)
    assert sol.active_set == (2,)
    assert sol.multipliers[2] > 0
    assert kkt_residual(toy_problem(), sol.x, sol.multipliers) < 1e-12


def test_enumeration_closed_form_projection():
    # projection of (2, 2) onto x1 + x2 <= 1 with unit metric
    p = make_problem(np.eye(2), [-2.0, -2.0], W=[[1.0, 1.0]], e=[1.0])
    sol = solve_constrained_enumeration(p)
    np.testing.assert_allclose(sol.x, [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(sol.multipliers, [1.5])


def test_enumeration_infeasible():
    p = make_problem(np.eye(1), [0.0], W=[[1.0], [-1.0]], e=[-1.0, -1.0], allow_dependent=True)
    with pytest.raises(Infeasible):
        solve_constrained_enumeration(p)


def test_enumeration_guard():
    p = make_problem(np.eye(2), [0.0, 0.0], W=np.tile([[1.0, 0.0]], (3, 1)) * [[1], [2], [3]],
                     e=[1.0, 2.0, 3.0], allow_dependent=True)
    with pytest.raises(ValueError):
        solve_constrained_enumeration(p, max_inequalities=2)


def test_penalized_zero_rho_is_unconstrained():
    p = toy_problem()
    np.testing.assert_allclose(minimize_penalized_grid(p, 0.0), np.linalg.solve(p.A, -p.b), atol=1e-14)


def test_penalized_scalar_closed_form():
    # min x^2/2 - 2x + rho * max(x - 1, 0): x = max(1, 2 - rho) for rho <= 1
    p = make_problem([[1.0]], [-2.0], W=[[1.0]], e=[1.0])
    for rho in (0.0, 0.25, 0.5, 1.0, 3.0):
        assert minimize_penalized_grid(p, rho)[0] == pytest.approx(max(1.0, 2.0 - rho), abs=1e-12)


def test_penalized_absolute_value_closed_form():
    p = make_problem([[2.0]], [-3.0], V=[[1.0]], d=[0.0])
    # stationarity 2x - 3 + rho*sign(x) = 0
    for rho, want in ((1.0, 1.0), (2.0, 0.5), (3.0, 0.0), (10.0, 0.0)):
        assert minimize_penalized_grid(p, rho)[0] == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_penalized_beats_perturbations(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    rho = float(rng.uniform(0.1, 10))
    x = minimize_penalized_grid(p, rho)
    assert penalized_kkt_violation(p, rho, x) <= 1e-9
    f = penalized_objective(p, x, rho)
    for _ in range(200):
        z = x + rng.standard_normal(p.m) * 10.0 ** rng.uniform(-6, 0)
        assert f <= penalized_objective(p, z, rho) + 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_large_rho_reaches_constrained_solution(seed):
    rng = np.random.default_rng(40 + seed)
    p = random_problem(rng)
    sol = solve_constrained_enumeration(p)
    rho = 2.0 * (1.0 + np.max(np.abs(sol.multipliers)))
    np.testing.assert_allclose(minimize_penalized_grid(p, rho), sol.x, atol=1e-8)


def test_kkt_violation_detects_wrong_point():
    p = toy_problem()
    assert penalized_kkt_violation(p, 1.0, np.array([0.0, 0.0])) > 1e-3


def test_pava_examples():
    np.testing.assert_allclose(pava_isotone([3.0, 1.0, 2.0]), [2.0, 2.0, 2.0])
    np.testing.assert_allclose(pava_isotone([1.0, 3.0, 2.0], [1.0, 1.0, 3.0]), [1.0, 2.25, 2.25])
    np.testing.assert_array_equal(pava_isotone([1.0, 2.0]), [1.0, 2.0])
    y = [0.3752, 0.3202, 0.2775, 0.3043, 0.5327]
    np.testing.assert_allclose(pava_isotone(y), [0.3193] * 4 + [0.5327], atol=1e-8)
