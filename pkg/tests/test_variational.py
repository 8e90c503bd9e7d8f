"""Tests for the unit-norm quadratic-form minimizer (lowest eigenpair solver)."""

import numpy as np
import pytest
import scipy.linalg as sla

from leastbias.errors import ConvergenceError, ValidationError
from leastbias.variational import (
    SolverConfig,
    SolverResult,
    SymmetricOperator,
    minimize_quadratic_form,
    stationarity_residual,
)


def _box_operator(n):
    """Second-difference quadratic form on n interior points of a unit interval."""
    h = 1.0 / (n + 1)
    diag = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return SymmetricOperator.from_tridiagonal(diag, off), diag, off


# ---------------------------------------------------------------------------
# small closed-form problems
# ---------------------------------------------------------------------------


def test_identity_operator_has_unit_minimum():
    result = minimize_quadratic_form(SymmetricOperator.from_dense(np.eye(5)))
    assert result.value == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(result.minimizer) == pytest.approx(1.0, abs=1e-12)
    assert result.residual <= 1e-10


def test_diagonal_operator_finds_smallest_entry():
    op = SymmetricOperator.from_dense(np.diag([3.0, 1.0, 4.0]))
    result = minimize_quadratic_form(op)
    assert result.value == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(np.abs(result.minimizer), [0.0, 1.0, 0.0], atol=1e-8)


def test_multipliers_expose_rayleigh_value():
    op = SymmetricOperator.from_dense(np.diag([2.0, 7.0]))
    result = minimize_quadratic_form(op)
    assert result.multipliers == (1.0, result.value)


def test_rotated_rank_structure_is_respected():
    # conjugating a diagonal matrix must not change the minimum value
    rng = np.random.default_rng(61)
    eigenvalues = np.array([0.5, 1.5, 2.5, 6.0])
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    op = SymmetricOperator.from_dense(q @ np.diag(eigenvalues) @ q.T)
    result = minimize_quadratic_form(op)
    assert result.value == pytest.approx(0.5, abs=1e-9)


# ---------------------------------------------------------------------------
# discretized interval problem with an independent eigensolver oracle
# ---------------------------------------------------------------------------


def test_interval_form_matches_eigensolver_and_refinement_limit():
    op, _, _ = _box_operator(2000)
    result = minimize_quadratic_form(op)
    assert abs(result.value - np.pi**2) < 5e-6 * np.pi**2

    # coarse direct eigenvalues plus one Richardson step reproduce the limit
    coarse = []
    for n in (200, 400):
        h = 1.0 / (n + 1)
        lam = sla.eigh_tridiagonal(
            np.full(n, 2.0 / h**2), np.full(n - 1, -1.0 / h**2),
            select="i", select_range=(0, 0))[0][0]
        coarse.append(lam)
    extrapolated = coarse[1] + (coarse[1] - coarse[0]) / 3.0
    assert abs(extrapolated - np.pi**2) < 1e-6
    # the solver at n=2000 must sit between the coarse value and the limit
    assert coarse[1] < result.value < np.pi**2


def test_minimizer_is_a_certified_eigenpair():
    rng = np.random.default_rng(62)
    a = rng.normal(size=(40, 40))
    op = SymmetricOperator.from_dense(0.5 * (a + a.T))
    config = SolverConfig(tol=1e-11)
    result = minimize_quadratic_form(op, config)
    dense_min = float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])
    assert result.value == pytest.approx(dense_min, abs=1e-9)
    assert np.linalg.norm(result.minimizer) == pytest.approx(1.0, abs=1e-12)
    assert stationarity_residual(op, result.minimizer) <= 1e-9 * max(1.0, abs(result.value))


def test_value_lower_bounds_random_rayleigh_quotients():
    op, _, _ = _box_operator(500)
    result = minimize_quadratic_form(op)
    rng = np.random.default_rng(63)
    for _ in range(100):
        v = rng.standard_normal(500)
        v /= np.linalg.norm(v)
        assert result.value <= float(v @ op.apply(v)) + 1e-9


# ---------------------------------------------------------------------------
# iteration behaviour
# ---------------------------------------------------------------------------


def test_rayleigh_history_descends_monotonically():
    # a deliberately distant shift slows the contraction so the descent
    # of the Rayleigh quotient is visible over many iterations
    op = SymmetricOperator.from_dense(np.diag(np.arange(1.0, 41.0)))
    config = SolverConfig(shift=-10.0, tol=1e-10)
    result = minimize_quadratic_form(op, config)
    assert result.iterations == len(result.rayleigh_history)
    assert result.iterations >= 5
    steps = np.diff(np.array(result.rayleigh_history))
    assert np.all(steps <= 1e-12)
    assert result.value == pytest.approx(1.0, abs=1e-8)


def test_repeated_solves_are_bitwise_identical():
    op, _, _ = _box_operator(300)
    first = minimize_quadratic_form(op, SolverConfig(seed=5))
    second = minimize_quadratic_form(op, SolverConfig(seed=5))
    assert first.value == second.value
    assert np.array_equal(first.minimizer, second.minimizer)
    assert first.rayleigh_history == second.rayleigh_history


def test_budget_exhaustion_raises_with_best_iterate():
    op = SymmetricOperator.from_dense(np.diag([1.0, 2.0, 3.0]))
    config = SolverConfig(shift=-1000.0, tol=1e-13, max_iterations=2)
    with pytest.raises(ConvergenceError) as excinfo:
        minimize_quadratic_form(op, config)
    err = excinfo.value
    assert err.iterations == 2
    assert err.best is not None and np.asarray(err.best).shape == (3,)
    assert err.residual > 0.0


def test_asymmetric_operator_is_rejected():
    op = SymmetricOperator.from_dense(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        minimize_quadratic_form(op)


def test_operator_validation():
    with pytest.raises(ValidationError):
        SymmetricOperator(0, lambda v: v)
    with pytest.raises(ValidationError):
        SymmetricOperator.from_tridiagonal(np.ones(4), np.ones(4))
    with pytest.raises(ValidationError):
        SymmetricOperator(3, lambda v: v, bands=np.ones((2, 4)))


# ---------------------------------------------------------------------------
# stationarity residual
# ---------------------------------------------------------------------------


def test_stationarity_residual_vanishes_on_eigenvectors():
    op = SymmetricOperator.from_dense(np.diag([2.0, 5.0]))
    assert stationarity_residual(op, np.array([1.0, 0.0])) == 0.0
    assert stationarity_residual(op, np.array([0.0, -1.0])) == 0.0


def test_stationarity_residual_equal_weight_mixture():
    op = SymmetricOperator.from_dense(np.diag([0.0, 1.0]))
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert stationarity_residual(op, v) == pytest.approx(0.5, abs=1e-12)


def test_stationarity_residual_matches_projection_formula():
    rng = np.random.default_rng(64)
    a = rng.normal(size=(12, 12))
    sym = 0.5 * (a + a.T)
    op = SymmetricOperator.from_dense(sym)
    for _ in range(20):
        v = rng.standard_normal(12)
        v /= np.linalg.norm(v)
        av = sym @ v
        expected = np.linalg.norm(av - v * float(v @ av))
        assert stationarity_residual(op, v) == pytest.approx(expected, abs=1e-12)


def test_stationarity_residual_validation():
    op = SymmetricOperator.from_dense(np.eye(3))
    with pytest.raises(ValidationError):
        stationarity_residual(op, np.ones(3))  # not unit length
    with pytest.raises(ValidationError):
        stationarity_residual(op, np.ones(4))


def test_solver_result_is_frozen_record():
    result = minimize_quadratic_form(SymmetricOperator.from_dense(np.eye(2)))
    assert isinstance(result, SolverResult)
    with pytest.raises(AttributeError):
        result.value = 0.0
