import numpy as np
import pytest

from sweeppath import solve_path
from sweeppath.errors import DimensionMismatch, NonIncreasingAbscissae, NonpositiveWeight
from sweeppath.oracle import pava_isotone, solve_constrained_enumeration
from sweeppath.shapes import (
    ShapeSpec,
    antitone_constraints,
    bound_sum_constraints,
    concavity_constraints,
    convexity_constraints,
    isotone_constraints,
    matrix_partial_order,
    nonnegativity_constraints,
    shape_constraints,
    weighted_mean_fit_problem,
)

from problem_factory import FISH_Y


def test_isotone_two():
    W, e = isotone_constraints(2)
    np.testing.assert_array_equal(W, [[1.0, -1.0]])
    np.testing.assert_array_equal(e, [0.0])


def test_isotone_rows_sum_to_zero():
    W, _ = isotone_constraints(7)
    assert W.shape == (6, 7)
    np.testing.assert_array_equal(W.sum(axis=1), 0.0)
    assert np.linalg.matrix_rank(W) == 6


def test_concavity_uniform():
    W, e = concavity_constraints(np.arange(5.0))
    for row in W:
        nz = row[row != 0]
        np.testing.assert_array_equal(nz, [1.0, -2.0, 1.0])
    np.testing.assert_array_equal(e, 0.0)


def test_concavity_irregular_spacing():
    W, _ = concavity_constraints([0.0, 1.0, 3.0])
    # slope on [0,1] minus slope on [1,3], written as W theta <= 0
    row = W[0] / W[0, 0]
    np.testing.assert_allclose(row, [1.0, -1.5, 0.5], atol=1e-15)
    assert W[0, 0] > 0
    np.testing.assert_allclose(W[0], np.array([2.0, -3.0, 1.0]) / 1.5)


def test_concavity_row_against_slope_definition():
    rng = np.random.default_rng(1)
    x = np.sort(rng.uniform(0, 10, 12))
    W, _ = concavity_constraints(x)
    theta = rng.standard_normal(12)
    h = np.diff(x)
    slopes = np.diff(theta) / h
    decrease = slopes[1:] - slopes[:-1]
    scale = h[:-1] * h[1:] / (0.5 * (h[:-1] + h[1:]))
    np.testing.assert_allclose(W @ theta, decrease * scale, atol=1e-12)


def test_concave_function_is_feasible():
    x = np.sort(np.random.default_rng(2).uniform(0, 1, 30))
    W, e = concavity_constraints(x)
    assert np.all(W @ (4 * x * (1 - x)) <= e)
    assert np.all(W @ (3 * x - 1) <= 1e-12)
    assert not np.all(W @ (x ** 2) <= e)


def test_negation_pairs():
    x = [0.0, 0.3, 1.0, 1.1]
    np.testing.assert_array_equal(antitone_constraints(4)[0], -isotone_constraints(4)[0])
    np.testing.assert_array_equal(convexity_constraints(x)[0], -concavity_constraints(x)[0])


def test_curvature_rows_independent():
    x = np.linspace(0, 1, 20)
    assert np.linalg.matrix_rank(concavity_constraints(x)[0]) == 18


@pytest.mark.parametrize("bad", [[0.0, 1.0, 1.0], [0.0, 2.0, 1.0]])
def test_nonincreasing_knots(bad):
    with pytest.raises(NonIncreasingAbscissae):
        concavity_constraints(bad)
    with pytest.raises(NonIncreasingAbscissae):
        ShapeSpec("concave", knots=bad)


def test_nonnegativity_and_bound_sum():
    W, e = nonnegativity_constraints(3)
    np.testing.assert_array_equal(W, -np.eye(3))
    W, e = bound_sum_constraints(3, 2.5)
    np.testing.assert_array_equal(W, [[1.0, 1.0, 1.0]])
    np.testing.assert_array_equal(e, [2.5])


def test_partial_order_one_by_two():
    W, e = matrix_partial_order(1, 2)
    np.testing.assert_array_equal(W, [[1.0, -1.0]])


def test_partial_order_counts_and_layout():
    W, _ = matrix_partial_order(2, 2)
    assert W.shape == (4, 4)
    W, _ = matrix_partial_order(2, 2, nonneg_corner=True)
    assert W.shape == (5, 4)
    np.testing.assert_array_equal(W[0], [-1, 0, 0, 0])
    # horizontal pair (0,0)-(0,1) then vertical pair (0,0)-(1,0)
    np.testing.assert_array_equal(W[1], [1, -1, 0, 0])
    np.testing.assert_array_equal(W[3], [1, 0, -1, 0])
    W, _ = matrix_partial_order(3, 4)
    assert W.shape[0] == 3 * 3 + 2 * 4


def test_feasible_witnesses():
    const = np.full(6, 0.7)
    for W, e in (isotone_constraints(6), antitone_constraints(6), matrix_partial_order(2, 3)):
        assert np.all(W @ const <= e)
    lin = np.linspace(-1, 2, 6)
    for W, e in (concavity_constraints(np.arange(6.0)), convexity_constraints(np.arange(6.0))):
        assert np.all(W @ lin <= e + 1e-12)


def test_shape_spec_validation():
    with pytest.raises(ValueError):
        ShapeSpec("wiggly")
    with pytest.raises(ValueError):
        ShapeSpec("matrix-partial-order")
    with pytest.raises(DimensionMismatch):
        shape_constraints(4, ShapeSpec("concave", knots=[0, 1, 2]))
    with pytest.raises(DimensionMismatch):
        shape_constraints(4, ShapeSpec("matrix-partial-order", grid_shape=(2, 3)))
    with pytest.raises(DimensionMismatch):
        shape_constraints(3, ShapeSpec("nonnegative", indices=[3]))


def test_shape_indices():
    W, e = shape_constraints(4, [ShapeSpec("nonnegative", indices=[0]), ShapeSpec("isotone", indices=[1, 3])])
    np.testing.assert_array_equal(W, [[-1, 0, 0, 0], [0, 1, 0, -1]])
    assert e.shape == (2,)


def test_weighted_mean_problem():
    p = weighted_mean_fit_problem([1.0, 2.0], [2.0, 3.0], ShapeSpec("isotone"))
    np.testing.assert_array_equal(p.A, np.diag([2.0, 3.0]))
    np.testing.assert_array_equal(p.b, [-2.0, -6.0])
    assert p.has_provenance
    with pytest.raises(NonpositiveWeight):
        weighted_mean_fit_problem([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        weighted_mean_fit_problem([1.0, 2.0], [1.0])


def test_fish_isotone():
    p = weighted_mean_fit_problem(FISH_Y, None, [ShapeSpec("nonnegative", indices=[0]), ShapeSpec("isotone")])
    path = solve_path(p)
    np.testing.assert_allclose(path.terminal_x, [0.3193, 0.3193, 0.3193, 0.3193, 0.5327], atol=1e-4)
    np.testing.assert_allclose(path.terminal_x, pava_isotone(FISH_Y), atol=1e-12)
    # the nonnegativity row never binds
    assert all(0 not in seg.active for seg in path.segments)


def test_already_isotone_data():
    y = [0.1, 0.2, 0.2, 0.9]
    path = solve_path(weighted_mean_fit_problem(y, None, ShapeSpec("isotone")))
    assert len(path.segments) == 1
    np.testing.assert_allclose(path.terminal_x, y)


@pytest.mark.parametrize("seed", range(10))
def test_weighted_isotone_matches_pava(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 30))
    y = rng.standard_normal(n) + np.linspace(0, 1, n)
    w = rng.uniform(0.2, 3.0, n)
    path = solve_path(weighted_mean_fit_problem(y, w, ShapeSpec("isotone")))
    np.testing.assert_allclose(path.terminal_x, pava_isotone(y, w), atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_grid_partial_order_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(9)
    p = weighted_mean_fit_problem(y, None, ShapeSpec("matrix-partial-order", grid_shape=(3, 3),
                                                     nonneg_corner=bool(seed % 2)))
    path = solve_path(p)
    np.testing.assert_allclose(path.terminal_x, solve_constrained_enumeration(p).x, atol=1e-6)


def test_concave_replica_terminates_feasible():
    rng = np.random.default_rng(20260101)
    x = np.sort(rng.uniform(0, 1, 100))
    y = 4 * x * (1 - x) + 0.3 * rng.standard_normal(100)
    p = weighted_mean_fit_problem(y, None, ShapeSpec("concave", knots=x))
    path = solve_path(p)
    assert np.all(p.W @ path.terminal_x <= 1e-8)
