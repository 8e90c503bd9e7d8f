"""Tests for ground states of Delta + V and the Gaussian collapse scan."""

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.optimize

from leastbias.errors import ValidationError
from leastbias.grids import ScalarFieldOnGrid, UniformGrid, inner_product
from leastbias.schrodinger import (
    CollapseScan,
    GroundStateResult,
    Potential,
    QuantumState,
    collapse_scan,
    ground_state,
    kinetic_additivity_check,
    kinetic_energy,
)


def _box_energy(n):
    grid = UniformGrid.dirichlet_box(((0.0, 1.0),), (n,))
    return ground_state(grid, Potential("zero")).energy


def _random_state(grid, rng, modes=4):
    """Normalized low-mode field, strictly positive offset to avoid zero norm."""
    values = np.full(grid.shape, 0.05)
    axes = grid.meshgrid()
    for _ in range(modes):
        term = np.ones(grid.shape)
        for k, x in enumerate(axes):
            span = grid.spacing[k] * (grid.shape[k] + 1)
            freq = np.pi * int(rng.integers(1, 5)) / span
            term = term * np.sin(freq * (x - grid.origin[k] + grid.spacing[k]))
        values += rng.uniform(-0.5, 0.5) * term
    return QuantumState(ScalarFieldOnGrid(grid, values).normalized())


# ---------------------------------------------------------------------------
# ground states against analytic values and an independent eigensolver
# ---------------------------------------------------------------------------


def test_unit_box_ground_energy():
    energy = _box_energy(2000)
    assert abs(energy - np.pi**2) < 5e-6 * np.pi**2


def test_box_energy_agrees_with_direct_eigensolver():
    n = 400
    grid = UniformGrid.dirichlet_box(((0.0, 1.0),), (n,))
    result = ground_state(grid, Potential("zero"))
    h = grid.spacing[0]
    oracle = sla.eigh_tridiagonal(np.full(n, 2.0 / h**2), np.full(n - 1, -1.0 / h**2),
                                  select="i", select_range=(0, 0))[0][0]
    assert result.energy == pytest.approx(oracle, rel=1e-10)


def test_box_error_shrinks_at_second_order():
    errors = [abs(_box_energy(n) - np.pi**2) for n in (250, 500, 1000)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 < coarse / fine < 4.5


def test_harmonic_oscillator_ground_energy():
    grid = UniformGrid.dirichlet_box(((-10.0, 10.0),), (4000,))
    result = ground_state(grid, Potential("harmonic", strength=1.0))
    assert abs(result.energy - 1.0) < 1e-4


def test_radial_hydrogen_ground_energy():
    grid = UniformGrid.dirichlet_box(((0.0, 40.0),), (8000,))
    result = ground_state(grid, Potential("coulomb_radial", strength=2.0))
    assert abs(result.energy - (-1.0)) < 1e-3


def test_energy_splits_into_kinetic_plus_potential():
    cases = [
        (UniformGrid.dirichlet_box(((0.0, 1.0),), (500,)), Potential("zero")),
        (UniformGrid.dirichlet_box(((-8.0, 8.0),), (1200,)), Potential("harmonic")),
        (UniformGrid.dirichlet_box(((0.0, 30.0),), (1500,)),
         Potential("coulomb_radial", strength=2.0)),
    ]
    for grid, potential in cases:
        result = ground_state(grid, potential)
        assert abs(result.energy - result.kinetic - result.potential) < 1e-10 * max(
            1.0, abs(result.energy))
        assert result.multipliers == (1.0, result.energy)
        assert inner_product(result.state.field, result.state.field) == pytest.approx(
            1.0, abs=1e-10)


def test_ground_energy_lower_bounds_trial_states():
    grid = UniformGrid.dirichlet_box(((0.0, 1.0),), (300,))
    potential = Potential("harmonic", strength=5.0)
    result = ground_state(grid, potential)
    vfield = potential.evaluate(grid)
    rng = np.random.default_rng(71)
    for _ in range(50):
        trial = _random_state(grid, rng)
        energy = kinetic_energy(trial) + float(
            np.sum(vfield.values * trial.field.values**2) * grid.cell_volume)
        assert result.energy <= energy + 1e-9


def test_two_dimensional_ground_state_runs_matrix_free():
    grid = UniformGrid.dirichlet_box(((0.0, 1.0), (0.0, 1.0)), (24, 24))
    result = ground_state(grid, Potential("zero"))
    # 2 pi^2 limit, coarse-grid value sits below it
    assert abs(result.energy - 2.0 * np.pi**2) < 0.05 * np.pi**2
    assert result.energy < 2.0 * np.pi**2


# ---------------------------------------------------------------------------
# kinetic term
# ---------------------------------------------------------------------------


def test_kinetic_energy_of_flat_state_is_zero():
    grid = UniformGrid.periodic_box((1.0,), (32,))
    state = QuantumState(ScalarFieldOnGrid(grid, np.ones(32)))
    assert abs(kinetic_energy(state)) < 1e-12


def test_kinetic_energy_of_box_mode_matches_stencil_eigenvalue():
    n = 400
    grid = UniformGrid.dirichlet_box(((0.0, 1.0),), (n,))
    x = grid.axis_coordinates(0)
    state = QuantumState(ScalarFieldOnGrid(grid, np.sqrt(2.0) * np.sin(np.pi * x)))
    h = grid.spacing[0]
    stencil_eigenvalue = (2.0 - 2.0 * np.cos(np.pi * h)) / h**2
    assert kinetic_energy(state) == pytest.approx(stencil_eigenvalue, rel=1e-11)
    assert kinetic_energy(state) == pytest.approx(np.pi**2, rel=1e-4)


def test_kinetic_energy_of_gaussian_tracks_width():
    for sigma in (0.5, 1.0):
        grid = UniformGrid.dirichlet_box(((-8.0, 8.0),), (2001,))
        x = grid.axis_coordinates(0)
        field = ScalarFieldOnGrid(grid, np.exp(-x * x / (2.0 * sigma**2))).normalized()
        assert kinetic_energy(QuantumState(field)) == pytest.approx(
            1.0 / (2.0 * sigma**2), rel=1e-3)


def test_kinetic_additivity_on_products():
    rng = np.random.default_rng(72)
    a_grid = UniformGrid.dirichlet_box(((0.0, 1.0),), (40,))
    b_grid = UniformGrid.dirichlet_box(((0.0, 2.0),), (50,))
    plane = UniformGrid.dirichlet_box(((0.0, 1.0), (0.0, 1.3)), (12, 14))
    for left, right in ((a_grid, b_grid), (a_grid, plane)):
        for _ in range(15):
            a, b = _random_state(left, rng), _random_state(right, rng)
            lhs, rhs, residual = kinetic_additivity_check(a, b)
            assert residual == abs(lhs - rhs)
            assert residual < 1e-10


def test_kinetic_additivity_with_flat_factor_reduces_to_one_term():
    grid = UniformGrid.periodic_box((1.0,), (64,))
    flat = QuantumState(ScalarFieldOnGrid(grid, np.ones(64)))
    x = grid.axis_coordinates(0)
    wave = QuantumState(ScalarFieldOnGrid(
        grid, np.sqrt(2.0) * np.sin(2.0 * np.pi * x)))
    lhs, rhs, residual = kinetic_additivity_check(wave, flat)
    assert rhs == pytest.approx(kinetic_energy(wave), abs=1e-12)
    assert residual < 1e-12


def test_kinetic_additivity_rejects_oversized_products():
    plane = UniformGrid.dirichlet_box(((0.0, 1.0), (0.0, 1.0)), (6, 6))
    rng = np.random.default_rng(73)
    state = _random_state(plane, rng)
    with pytest.raises(ValidationError):
        kinetic_additivity_check(state, state)


# ---------------------------------------------------------------------------
# potentials and states
# ---------------------------------------------------------------------------


def test_potential_validation():
    with pytest.raises(ValidationError):
        Potential("anharmonic")
    with pytest.raises(ValidationError):
        Potential("tabulated")
    plane = UniformGrid.dirichlet_box(((0.0, 1.0), (0.0, 1.0)), (4, 4))
    with pytest.raises(ValidationError):
        Potential("coulomb_radial").evaluate(plane)
    crossing = UniformGrid.dirichlet_box(((-1.0, 1.0),), (9,))
    with pytest.raises(ValidationError):
        Potential("coulomb_radial").evaluate(crossing)
    line = UniformGrid.dirichlet_box(((0.0, 1.0),), (5,))
    other = UniformGrid.dirichlet_box(((0.0, 2.0),), (5,))
    with pytest.raises(ValidationError):
        Potential("tabulated", samples=other.sample(np.sin)).evaluate(line)


def test_tabulated_potential_matches_explicit_samples():
    line = UniformGrid.dirichlet_box(((0.0, 1.0),), (64,))
    samples = line.sample(lambda x: 3.0 * x)
    values = Potential("tabulated", samples=samples).evaluate(line)
    np.testing.assert_allclose(values.values, samples.values, atol=0)


def test_quantum_state_requires_unit_norm():
    grid = UniformGrid.periodic_box((1.0,), (16,))
    with pytest.raises(ValidationError):
        QuantumState(ScalarFieldOnGrid(grid, np.full(16, 2.0)))


# ---------------------------------------------------------------------------
# collapse scan
# ---------------------------------------------------------------------------


def _analytic_total(sigma, charge=2.0):
    return 1.5 / sigma**2 - 2.0 * charge / (np.sqrt(np.pi) * sigma)


def test_collapse_scan_kinetic_scales_as_inverse_width_squared():
    scan = collapse_scan(np.linspace(0.6, 3.0, 121))
    scaled = scan.kinetic * scan.sigmas**2
    np.testing.assert_allclose(scaled, 1.5, rtol=1e-6)


def test_collapse_scan_potential_scales_as_inverse_width():
    scan = collapse_scan(np.linspace(0.6, 3.0, 121), charge=2.0)
    scaled = scan.potential * scan.sigmas
    # the radial quadrature carries a ~1e-6 relative discretization error
    np.testing.assert_allclose(scaled, -4.0 / np.sqrt(np.pi), rtol=1e-5)


def test_collapse_scan_minimum_matches_line_search_oracle():
    scan = collapse_scan(np.linspace(0.6, 3.0, 241), charge=2.0)
    sigma_star, total_star = scan.minimum()
    bracket = scipy.optimize.minimize_scalar(_analytic_total, bracket=(0.8, 1.5, 2.5),
                                             method="golden")
    assert bracket.x == pytest.approx(3.0 * np.sqrt(np.pi) / 4.0, rel=1e-6)
    assert sigma_star == pytest.approx(bracket.x, abs=0.011)
    assert abs(total_star - (-8.0 / (3.0 * np.pi))) < 1e-3


def test_collapse_scan_total_rises_away_from_the_minimum():
    scan = collapse_scan(np.linspace(0.3, 5.0, 201))
    _, total_star = scan.minimum()
    assert scan.total[0] > 0.0 > total_star
    assert scan.total[-1] > total_star


def test_collapse_scan_matches_closed_form_totals():
    sigmas = np.array([0.7, 1.0, 1.8])
    scan = collapse_scan(sigmas, charge=2.0)
    np.testing.assert_allclose(scan.total, _analytic_total(sigmas), atol=1e-5)


def test_collapse_scan_validation():
    with pytest.raises(ValidationError):
        collapse_scan(np.array([]))
    with pytest.raises(ValidationError):
        collapse_scan(np.array([0.5, -1.0]))
    with pytest.raises(ValidationError):
        collapse_scan(np.array([[0.5, 1.0]]))
