"""Acceptance battery: every shipping-gate criterion as a callable check.

Each criterion function runs a fixed, fully seeded experiment and returns
(passed, metrics) where metrics maps stable keys to measured values and
the tolerances they were held against. The battery is shared between the
test suite and the command-line `suite` command so both report the same
numbers. Runtimes live outside the metrics so that two runs of the
battery serialize to byte-identical results — which is itself the final
criterion.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import cartan, dec, geometry, probkit, schrodinger, spinor, surfaces
from .grids import ScalarFieldOnGrid, UniformGrid
from .schrodinger import Potential, QuantumState

__all__ = [
    "CriterionRecord",
    "CRITERION_NAMES",
    "run_criterion",
    "run_battery",
    "results_payload",
    "serialize_results",
    "summary_lines",
]


@dataclass(frozen=True)
class CriterionRecord:
    name: str
    passed: bool
    metrics: dict
    budget_seconds: float
    elapsed_seconds: float


# ---------------------------------------------------------------------------
# probability criteria

def _crit_maxent_form():
    rng = np.random.default_rng(101)
    worst_component = 0.0
    worst_mean = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 13))
        values = rng.uniform(-2.0, 3.0, n)
        while np.ptp(values) < 0.5:
            values = rng.uniform(-2.0, 3.0, n)
        target = float(values.min() + rng.uniform(0.15, 0.85) * np.ptp(values))
        sol = probkit.solve_maxent(probkit.EnergyLevels(values), target)
        form = np.exp(-sol.beta * values - sol.log_normalizer)
        p = sol.distribution.weights
        worst_component = max(worst_component, float(np.max(np.abs(p - form))))
        worst_mean = max(worst_mean, abs(float(p @ values) - target))
    two = probkit.solve_maxent(probkit.EnergyLevels(np.array([0.0, 1.0])), 0.25)
    beta_error = abs(two.beta - np.log(3.0))
    passed = worst_component < 1e-10 and worst_mean < 1e-10 and beta_error < 1e-9
    return passed, {
        "max_component_residual": worst_component, "component_tolerance": 1e-10,
        "max_mean_residual": worst_mean, "mean_tolerance": 1e-10,
        "two_level_beta_error": beta_error, "beta_tolerance": 1e-9,
    }


def _crit_entropy_additivity():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(200):
        p = probkit.DiscreteDistribution(rng.dirichlet(np.ones(int(rng.integers(2, 16)))))
        q = probkit.DiscreteDistribution(rng.dirichlet(np.ones(int(rng.integers(2, 16)))))
        joint = probkit.product_distribution(p, q)
        gap = abs(probkit.entropy(joint) - probkit.entropy(p) - probkit.entropy(q))
        worst = max(worst, gap)
    return worst < 1e-12, {"max_additivity_gap": worst, "tolerance": 1e-12}


def _crit_mixing_monotonicity():
    rng = np.random.default_rng(303)
    worst_slack = np.inf
    violations = 0
    for _ in range(200):
        n = int(rng.integers(3, 13))
        p = probkit.DiscreteDistribution(rng.dirichlet(np.ones(n)))
        mixed = probkit.apply_mixing(p, probkit.birkhoff_mixing(n, rng))
        slack = probkit.entropy(mixed) - probkit.entropy(p)
        worst_slack = min(worst_slack, slack)
        if slack < -1e-12:
            violations += 1
    return violations == 0, {
        "violations": violations, "min_entropy_gain": float(worst_slack),
        "slack_tolerance": 1e-12,
    }


# ---------------------------------------------------------------------------
# correlation-measure criteria

def _random_smooth_state(rng, grid: UniformGrid) -> QuantumState:
    coords = grid.meshgrid()
    values = np.zeros(grid.shape)
    for axis, x in enumerate(coords):
        lo = grid.origin[axis] - grid.spacing[axis]
        length = grid.spacing[axis] * (grid.shape[axis] + 1)
        for mode in range(1, 5):
            values += rng.uniform(-1.0, 1.0) * np.sin(mode * np.pi * (x - lo) / length)
    field = ScalarFieldOnGrid(grid, values + 0.05)
    return QuantumState(field.normalized())


def _crit_kinetic_additivity():
    rng = np.random.default_rng(404)
    line_a = UniformGrid.dirichlet_box(((0.0, 1.0),), (40,))
    line_b = UniformGrid.dirichlet_box(((0.0, 2.0),), (50,))
    plane = UniformGrid.dirichlet_box(((0.0, 1.0), (0.0, 1.3)), (12, 14))
    worst = 0.0
    for k in range(50):
        a = _random_smooth_state(rng, line_a)
        b = _random_smooth_state(rng, line_b if k % 2 == 0 else plane)
        worst = max(worst, schrodinger.kinetic_additivity_check(a, b)[2])
    return worst < 1e-10, {"max_additivity_residual": worst, "tolerance": 1e-10}


def _tridiagonal_ground_energy(grid: UniformGrid, potential: Potential) -> float:
    h = grid.spacing[0]
    v = potential.evaluate(grid).values
    diag = 2.0 / h**2 + v
    off = np.full(grid.shape[0] - 1, -1.0 / h**2)
    vals = sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
    return float(vals[0])


def _crit_ground_states():
    box_fine = UniformGrid.dirichlet_box(((0.0, 1.0),), (2000,))
    box_coarse = UniformGrid.dirichlet_box(((0.0, 1.0),), (60,))
    zero = Potential("zero")
    box_energy = schrodinger.ground_state(box_fine, zero).energy
    box_rel = abs(box_energy - np.pi**2) / np.pi**2
    box_oracle = abs(schrodinger.ground_state(box_coarse, zero).energy
                     - _tridiagonal_ground_energy(box_coarse, zero))

    osc_fine = UniformGrid.dirichlet_box(((-10.0, 10.0),), (4000,))
    osc_coarse = UniformGrid.dirichlet_box(((-10.0, 10.0),), (200,))
    harmonic = Potential("harmonic")
    osc_energy = schrodinger.ground_state(osc_fine, harmonic).energy
    osc_err = abs(osc_energy - 1.0)
    osc_oracle = abs(schrodinger.ground_state(osc_coarse, harmonic).energy
                     - _tridiagonal_ground_energy(osc_coarse, harmonic))

    hyd_fine = UniformGrid.dirichlet_box(((0.0, 40.0),), (2000,))
    hyd_coarse = UniformGrid.dirichlet_box(((0.0, 40.0),), (300,))
    coulomb = Potential("coulomb_radial", strength=2.0)
    hyd_energy = schrodinger.ground_state(hyd_fine, coulomb).energy
    hyd_err = abs(hyd_energy + 1.0)
    hyd_oracle = abs(schrodinger.ground_state(hyd_coarse, coulomb).energy
                     - _tridiagonal_ground_energy(hyd_coarse, coulomb))

    oracle_gap = max(box_oracle, osc_oracle, hyd_oracle)
    passed = (box_rel < 5e-6 and osc_err < 1e-4 and hyd_err < 1e-3
              and oracle_gap < 1e-9)
    return passed, {
        "box_energy": box_energy, "box_relative_error": box_rel, "box_tolerance": 5e-6,
        "oscillator_energy": osc_energy, "oscillator_error": osc_err,
        "oscillator_tolerance": 1e-4,
        "hydrogen_energy": hyd_energy, "hydrogen_error": hyd_err,
        "hydrogen_tolerance": 1e-3,
        "max_coarse_oracle_gap": oracle_gap, "oracle_tolerance": 1e-9,
    }


def _crit_collapse_scan():
    scan = schrodinger.collapse_scan(np.linspace(0.6, 3.0, 241))
    sigma_star, total_star = scan.minimum()
    interior = 0 < int(np.argmin(scan.total)) < scan.sigmas.size - 1
    min_error = abs(total_star - (-8.0 / (3.0 * np.pi)))
    product = scan.kinetic * scan.sigmas**2
    spread = float(np.max(np.abs(product / np.mean(product) - 1.0)))
    passed = interior and min_error < 1e-3 and spread < 1e-6
    return passed, {
        "minimum_width": sigma_star, "minimum_total": total_star,
        "minimum_error": min_error, "minimum_tolerance": 1e-3,
        "interior_minimum": interior,
        "kinetic_width_square_spread": spread, "spread_tolerance": 1e-6,
    }


# ---------------------------------------------------------------------------
# film criteria

def _crit_soap_film():
    exact_grid = surfaces.film_grid(((0.0, 1.0), (0.0, 1.0)), (17, 17))
    cubic = lambda x, y: x**3 - 3.0 * x * y**2 + 2.0 * x - y + 1.0
    frame = surfaces.WireFrame.from_function(exact_grid, cubic)
    solution = surfaces.solve_film(frame, rtol=1e-13)
    xs, ys = exact_grid.meshgrid()
    exact_error = float(np.max(np.abs(solution.height.values - cubic(xs, ys))))

    fine_grid = surfaces.film_grid(((0.0, 1.0), (0.0, 1.0)), (129, 129))
    harmonic = lambda x, y: np.exp(x) * np.cos(y)
    fine = surfaces.solve_film(surfaces.WireFrame.from_function(fine_grid, harmonic))
    xf, yf = fine_grid.meshgrid()
    harmonic_error = float(np.max(np.abs(fine.height.values - harmonic(xf, yf))))

    rng = np.random.default_rng(707)
    grid = surfaces.film_grid(((0.0, 1.0), (0.0, 1.0)), (21, 21))
    ring = surfaces.WireFrame.from_function(grid, lambda x, y: 0.0 * x)
    ring_size = ring.boundary_values.size
    principle_ok = True
    worst_overshoot = 0.0
    for _ in range(50):
        frame = surfaces.WireFrame(grid, rng.uniform(-1.0, 1.0, ring_size))
        height = surfaces.solve_film(frame).height.values
        interior = height[1:-1, 1:-1]
        overshoot = max(float(frame.boundary_values.min() - interior.min()),
                        float(interior.max() - frame.boundary_values.max()))
        worst_overshoot = max(worst_overshoot, overshoot)
        if overshoot > 1e-10:
            principle_ok = False
    passed = exact_error < 1e-12 and harmonic_error < 1e-3 and principle_ok
    return passed, {
        "cubic_boundary_error": exact_error, "exactness_tolerance": 1e-12,
        "harmonic_boundary_error": harmonic_error, "harmonic_tolerance": 1e-3,
        "max_principle_overshoot": worst_overshoot, "overshoot_tolerance": 1e-10,
    }


def _crit_mean_value():
    grid = surfaces.film_grid(((0.0, 1.0), (0.0, 1.0)), (257, 257))
    field = grid.sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    h = grid.spacing[0]
    center = (128, 128)
    measured_1, model_1 = surfaces.mean_value_residual(field, center, 32 * h)
    measured_2, model_2 = surfaces.mean_value_residual(field, center, 16 * h)
    band_1 = abs(measured_1 - model_1) / abs(model_1)
    band_2 = abs(measured_2 - model_2) / abs(model_2)
    ratio = measured_2 / measured_1
    passed = band_1 < 0.1 and band_2 < 0.1 and 0.23 <= ratio <= 0.27
    return passed, {
        "residual_large": float(measured_1), "model_large": float(model_1),
        "residual_small": float(measured_2), "model_small": float(model_2),
        "relative_band_large": band_1, "relative_band_small": band_2,
        "band_tolerance": 0.1,
        "halving_ratio": float(ratio), "ratio_low": 0.23, "ratio_high": 0.27,
    }


# ---------------------------------------------------------------------------
# exterior-calculus criteria

def _unit_cochain(rng, mesh, degree):
    c = dec.Cochain(mesh, degree, rng.standard_normal(mesh.cell_count(degree)))
    scale = np.sqrt(dec.cochain_inner(c, c))
    return dec.Cochain(mesh, degree, c.coefficients / scale)


def _crit_dec_identities():
    mesh = dec.PeriodicMesh((64, 64), (1.0, 1.0))
    closure = mesh.incidence[1] @ mesh.incidence[0]
    closure_max = float(np.max(np.abs(closure.data))) if closure.nnz else 0.0

    rng = np.random.default_rng(909)
    adjoint_gap = 0.0
    for degree in (0, 1):
        for _ in range(10):
            a = _unit_cochain(rng, mesh, degree)
            b = _unit_cochain(rng, mesh, degree + 1)
            lhs = dec.cochain_inner(dec.exterior_derivative(a), b)
            rhs = dec.cochain_inner(a, dec.codifferential(b))
            adjoint_gap = max(adjoint_gap, abs(lhs - rhs))

    symmetry_gap = 0.0
    min_rayleigh = np.inf
    for degree in (0, 1, 2):
        for _ in range(5):
            a = _unit_cochain(rng, mesh, degree)
            b = _unit_cochain(rng, mesh, degree)
            la, lb = dec.derham_laplacian(a), dec.derham_laplacian(b)
            symmetry_gap = max(symmetry_gap, abs(dec.cochain_inner(la, b)
                                                 - dec.cochain_inner(a, lb)))
            min_rayleigh = min(min_rayleigh, dec.cochain_inner(a, la))

    coords = mesh.vertex_coordinates()
    wave = np.cos(2.0 * np.pi * coords[:, 0]) * np.cos(2.0 * np.pi * coords[:, 1])
    c = dec.Cochain(mesh, 0, wave)
    rayleigh = dec.cochain_inner(c, dec.derham_laplacian(c)) / dec.cochain_inner(c, c)
    mode_rel = abs(rayleigh - 8.0 * np.pi**2) / (8.0 * np.pi**2)

    passed = (closure_max < 1e-14 and adjoint_gap < 1e-12
              and symmetry_gap < 1e-12 and min_rayleigh > -1e-12
              and mode_rel < 1e-2)
    return passed, {
        "closure_max": closure_max, "closure_tolerance": 1e-14,
        "adjointness_gap": adjoint_gap, "adjointness_tolerance": 1e-12,
        "laplacian_symmetry_gap": symmetry_gap, "symmetry_tolerance": 1e-12,
        "min_rayleigh": float(min_rayleigh),
        "torus_mode_relative_error": mode_rel, "mode_tolerance": 1e-2,
    }


# ---------------------------------------------------------------------------
# curvature criteria

_SPHERE_POINTS = [np.array([th, ph]) for th in (0.5, 1.2, 2.3)
                  for ph in (0.4, 2.2, 5.1)]


def _crit_curvature_identity():
    scalar_err = 0.0
    identity_gap = 0.0
    constancy = 0.0
    for radius in (1.0, 2.0):
        metric = geometry.sphere_metric(radius)
        for x in _SPHERE_POINTS:
            bundle = geometry.curvature(metric, x)
            scalar_err = max(scalar_err, abs(bundle.scalar - 2.0 / radius**2))
            gap = geometry.laplacian_of_metric(metric, x) - bundle.ricci
            identity_gap = max(identity_gap, float(np.max(np.abs(gap))))
            constancy = max(constancy, geometry.covariant_constancy_check(metric, x))
    flat_points = {
        "euclidean": (geometry.euclidean_metric(), np.array([0.3, -1.2])),
        "polar_plane": (geometry.polar_plane_metric(), np.array([1.7, 2.5])),
        "flat_torus": (geometry.flat_torus_metric(), np.array([2.0, 3.1])),
    }
    for metric, x in flat_points.values():
        bundle = geometry.curvature(metric, x)
        scalar_err = max(scalar_err, abs(bundle.scalar))
        gap = geometry.laplacian_of_metric(metric, x) - bundle.ricci
        identity_gap = max(identity_gap, float(np.max(np.abs(gap))))
        constancy = max(constancy, geometry.covariant_constancy_check(metric, x))
    passed = scalar_err < 1e-6 and identity_gap < 1e-4 and constancy < 1e-8
    return passed, {
        "max_scalar_error": scalar_err, "scalar_tolerance": 1e-6,
        "max_identity_gap": identity_gap, "identity_tolerance": 1e-4,
        "max_covariant_constancy": constancy, "constancy_tolerance": 1e-8,
    }


def _crit_hilbert_action():
    target = 8.0 * np.pi
    action_1 = geometry.hilbert_action(geometry.sphere_metric(1.0), (200, 64))
    action_2 = geometry.hilbert_action(geometry.sphere_metric(2.0), (200, 64))
    torus = geometry.hilbert_action(geometry.flat_torus_metric(), (32, 32))
    bump = geometry.hilbert_action(geometry.sphere_bump_metric(1.0, 0.1), (200, 64))
    rel_1 = abs(action_1 - target) / target
    rel_2 = abs(action_2 - target) / target
    bump_shift = abs(bump - action_1) / target
    passed = (rel_1 < 1e-3 and rel_2 < 1e-3 and abs(torus) < 1e-10
              and bump_shift < 1e-2)
    return passed, {
        "sphere_action_r1": action_1, "sphere_action_r2": action_2,
        "sphere_relative_error": max(rel_1, rel_2), "sphere_tolerance": 1e-3,
        "torus_action": torus, "torus_tolerance": 1e-10,
        "bump_relative_shift": bump_shift, "bump_tolerance": 1e-2,
    }


def _crit_structure_equations():
    polar = cartan.levi_civita_connection(cartan.polar_orthonormal_coframe())
    polar_pts = np.array([[r, ph] for r in (0.5, 2.0, 7.0) for ph in (0.7, 3.0, 5.5)])
    torsion_max = float(np.max(np.abs(cartan.structure_torsion(polar, polar_pts))))

    sphere = cartan.levi_civita_connection(cartan.sphere_orthonormal_coframe())
    sphere_pts = np.stack(_SPHERE_POINTS)
    torsion_max = max(torsion_max,
                      float(np.max(np.abs(cartan.structure_torsion(sphere, sphere_pts)))))

    form = cartan.structure_curvature(sphere, sphere_pts)[..., 0, 1]
    form_err = float(np.max(np.abs(form - np.sin(sphere_pts[:, 0]))))

    frames = form / np.linalg.det(sphere.coframe_at(sphere_pts))
    metric = geometry.sphere_metric(1.0)
    coords = np.array([geometry.curvature(metric, x).scalar / 2.0 for x in sphere_pts])
    agreement = float(np.max(np.abs(frames - coords)))

    flat_gap = float(np.max(np.abs(cartan.structure_curvature(polar, polar_pts))))
    passed = (torsion_max < 1e-6 and form_err < 1e-6
              and agreement < 1e-4 and flat_gap < 1e-4)
    return passed, {
        "max_levi_civita_torsion": torsion_max, "torsion_tolerance": 1e-6,
        "sphere_form_error": form_err, "form_tolerance": 1e-6,
        "frame_coordinate_gap": max(agreement, flat_gap), "agreement_tolerance": 1e-4,
    }


def _crit_frame_descent():
    flat_norm = float(np.linalg.norm(
        cartan.torsion_functional_gradient(cartan.cartesian_coframe(), 16)))

    result = cartan.minimize_torsion_functional(
        cartan.perturbed_coframe(epsilon=0.1), resolution=16)
    drops = np.diff(result.history)
    perturbed_monotone = bool(np.all(drops <= 0.0))

    seeds_monotone = True
    worst_rise = 0.0
    for seed in range(100):
        config = cartan.random_rotation_coframe(seed=seed, amplitude=0.05)
        run = cartan.minimize_torsion_functional(config, resolution=16, tol=1e-9)
        rise = float(np.max(np.diff(run.history), initial=-np.inf))
        worst_rise = max(worst_rise, rise)
        if rise > 0.0:
            seeds_monotone = False
    passed = (flat_norm < 1e-8 and result.final_value < 1e-6
              and result.iterations <= 500 and perturbed_monotone and seeds_monotone)
    return passed, {
        "flat_gradient_norm": flat_norm, "gradient_tolerance": 1e-8,
        "perturbed_final_value": result.final_value, "final_tolerance": 1e-6,
        "perturbed_iterations": result.iterations, "iteration_budget": 500,
        "perturbed_monotone": perturbed_monotone,
        "seeds_monotone": seeds_monotone, "max_seed_rise": worst_rise,
    }


def _crit_spinor_algebra():
    table = spinor.anticommutator_table()
    table_max = float(np.max(table))
    k = np.array([3.0, 1.0, -2.0, 0.5])
    m = np.array([1.0, -1.5, 2.0, 0.25])
    square_dev = max(spinor.slash_square_deviation(k),
                     spinor.slash_square_deviation(m),
                     spinor.slash_square_deviation(np.array([3.0, 1.0, 2.0, 0.0])))
    combo = 2.0 * k - 0.5 * m
    linearity = float(np.max(np.abs(
        spinor.dirac_slash(combo)
        - 2.0 * spinor.dirac_slash(k) + 0.5 * spinor.dirac_slash(m))))
    passed = table_max == 0.0 and square_dev == 0.0 and linearity == 0.0
    return passed, {
        "anticommutator_max": table_max,
        "slash_square_deviation": square_dev,
        "linearity_deviation": linearity,
        "tolerance": 0.0,
    }


# ---------------------------------------------------------------------------
# battery plumbing

_CRITERIA = (
    ("maxent-boltzmann-form", 1.0, _crit_maxent_form),
    ("entropy-additivity", 1.0, _crit_entropy_additivity),
    ("mixing-monotonicity", 1.0, _crit_mixing_monotonicity),
    ("kinetic-additivity", 10.0, _crit_kinetic_additivity),
    ("ground-states", 60.0, _crit_ground_states),
    ("collapse-scan", 5.0, _crit_collapse_scan),
    ("soap-film", 30.0, _crit_soap_film),
    ("mean-value-property", 5.0, _crit_mean_value),
    ("dec-identities", 30.0, _crit_dec_identities),
    ("curvature-ricci-identity", 30.0, _crit_curvature_identity),
    ("curvature-action", 60.0, _crit_hilbert_action),
    ("structure-equations", 30.0, _crit_structure_equations),
    ("frame-descent", 120.0, _crit_frame_descent),
    ("spinor-algebra", 1.0, _crit_spinor_algebra),
)

DETERMINISM_NAME = "determinism"
DETERMINISM_BUDGET = 360.0

CRITERION_NAMES = tuple(name for name, _, _ in _CRITERIA) + (DETERMINISM_NAME,)


def _run_one(name: str, budget: float, fn) -> CriterionRecord:
    start = time.perf_counter()
    passed, metrics = fn()
    elapsed = time.perf_counter() - start
    return CriterionRecord(name, bool(passed), metrics, budget, elapsed)


def results_payload(records) -> list[dict]:
    """The deterministic part of the battery output (no timings)."""
    return [{"name": r.name, "passed": r.passed, "metrics": r.metrics}
            for r in records]


def serialize_results(records) -> str:
    return json.dumps(results_payload(records), sort_keys=True)


def run_criterion(name: str) -> CriterionRecord:
    for cname, budget, fn in _CRITERIA:
        if cname == name:
            return _run_one(cname, budget, fn)
    if name == DETERMINISM_NAME:
        return run_battery()[-1]
    raise KeyError(f"unknown criterion {name!r}")


def run_battery(include_determinism: bool = True) -> list[CriterionRecord]:
    """Run every criterion in order; the final record repeats the whole
    battery and demands byte-identical serialized results."""
    records = [_run_one(name, budget, fn) for name, budget, fn in _CRITERIA]
    if include_determinism:
        start = time.perf_counter()
        repeat = [_run_one(name, budget, fn) for name, budget, fn in _CRITERIA]
        first, second = serialize_results(records), serialize_results(repeat)
        elapsed = time.perf_counter() - start
        records.append(CriterionRecord(
            DETERMINISM_NAME, first == second,
            {"identical": first == second, "payload_bytes": len(first)},
            DETERMINISM_BUDGET, elapsed))
    return records


def summary_lines(records) -> list[str]:
    lines = []
    for r in records:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{status} {r.name} [{r.elapsed_seconds:.2f}s"
                     f" of {r.budget_seconds:.0f}s budget]")
    return lines
