"""Tests for chart metrics, curvature tensors, tensor Laplacians, and the action."""

import numpy as np
import pytest

from leastbias.errors import ValidationError
from leastbias.geometry import (
    METRIC_FAMILIES,
    AlternatingTensorField,
    ParametrizedMetric,
    christoffel,
    conformal_scale,
    covariant_constancy_check,
    curvature,
    curvature_samples,
    derham_laplacian_tensor,
    hilbert_action,
    laplacian_of_metric,
    metric_family,
)

SPHERE_POINTS = [np.array([th, ph]) for th in (0.5, 1.2, 2.3) for ph in (0.4, 2.2, 5.1)]


def _fd_only_sphere(radius=1.0):
    """Sphere components without closed-form derivatives (finite-difference path)."""
    r2 = radius * radius

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = r2
        out[..., 1, 1] = r2 * np.sin(pts[..., 0]) ** 2
        return out

    return ParametrizedMetric(2, ((0.0, np.pi), (0.0, 2.0 * np.pi)), comp)


def _random_conformal_metric(seed):
    """Flat plane rescaled by a smooth closed-form exponential factor."""
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0.05, 0.2, size=2)

    def u(pts):
        pts = np.asarray(pts, dtype=float)
        return a * np.sin(pts[..., 0]) + b * np.cos(pts[..., 1])

    def du(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2,))
        out[..., 0] = a * np.cos(pts[..., 0])
        out[..., 1] = -b * np.sin(pts[..., 1])
        return out

    def ddu(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = -a * np.sin(pts[..., 0])
        out[..., 1, 1] = -b * np.cos(pts[..., 1])
        return out

    return conformal_scale(metric_family("euclidean"), u, du, ddu)


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------


def test_christoffel_vanishes_on_the_plane():
    metric = metric_family("euclidean")
    np.testing.assert_allclose(christoffel(metric, [0.3, -1.2]), 0.0, atol=1e-12)


def test_christoffel_sphere_components():
    metric = metric_family("sphere", radius=1.0)
    for point in SPHERE_POINTS:
        th = point[0]
        gamma = christoffel(metric, point)
        assert gamma[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), abs=1e-10)
        assert gamma[1, 0, 1] == pytest.approx(1.0 / np.tan(th), abs=1e-10)
        assert gamma[1, 1, 0] == pytest.approx(1.0 / np.tan(th), abs=1e-10)
        assert gamma[0, 0, 0] == pytest.approx(0.0, abs=1e-12)


def test_christoffel_polar_components():
    metric = metric_family("polar_plane")
    for r in (0.5, 2.0, 7.0):
        gamma = christoffel(metric, [r, 1.3])
        assert gamma[0, 1, 1] == pytest.approx(-r, rel=1e-10)
        assert gamma[1, 0, 1] == pytest.approx(1.0 / r, rel=1e-10)
        assert gamma[1, 1, 0] == pytest.approx(1.0 / r, rel=1e-10)


def test_christoffel_is_symmetric_in_lower_indices():
    metric = _random_conformal_metric(91)
    rng = np.random.default_rng(92)
    for _ in range(10):
        gamma = christoffel(metric, rng.uniform(-5.0, 5.0, size=2))
        np.testing.assert_allclose(gamma, np.swapaxes(gamma, 1, 2), atol=1e-10)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


def test_flat_charts_have_zero_curvature():
    flat_cases = [
        (metric_family("euclidean"), [0.3, -1.2]),
        (metric_family("polar_plane"), [1.7, 2.5]),
        (metric_family("flat_torus"), [2.0, 3.1]),
    ]
    for metric, point in flat_cases:
        bundle = curvature(metric, point)
        assert abs(bundle.scalar) < 1e-8
        np.testing.assert_allclose(bundle.riemann, 0.0, atol=1e-8)
        np.testing.assert_allclose(bundle.ricci, 0.0, atol=1e-8)


def test_sphere_scalar_curvature_is_two_over_radius_squared():
    for radius in (1.0, 2.0):
        metric = metric_family("sphere", radius=radius)
        for point in SPHERE_POINTS:
            bundle = curvature(metric, point)
            assert abs(bundle.scalar - 2.0 / radius**2) < 1e-9


def test_sphere_riemann_and_ricci_components():
    metric = metric_family("sphere", radius=1.0)
    for point in SPHERE_POINTS:
        th = point[0]
        bundle = curvature(metric, point)
        # R^theta_phi theta phi = sin^2, Ricci = metric for the unit sphere
        assert bundle.riemann[0, 1, 0, 1] == pytest.approx(np.sin(th) ** 2, abs=1e-9)
        np.testing.assert_allclose(bundle.ricci, metric.metric(point), atol=1e-9)


def test_riemann_symmetries_on_random_conformal_charts():
    for seed in (93, 94, 95):
        metric = _random_conformal_metric(seed)
        rng = np.random.default_rng(seed + 100)
        for _ in range(5):
            bundle = curvature(metric, rng.uniform(-5.0, 5.0, size=2))
            riemann = bundle.riemann
            # antisymmetry in the last index pair
            np.testing.assert_allclose(riemann, -np.swapaxes(riemann, 2, 3), atol=1e-8)
            # first Bianchi identity: cyclic sum over the lower indices
            cyclic = (riemann + np.transpose(riemann, (0, 2, 3, 1))
                      + np.transpose(riemann, (0, 3, 1, 2)))
            np.testing.assert_allclose(cyclic, 0.0, atol=1e-8)
            np.testing.assert_allclose(bundle.ricci, bundle.ricci.T, atol=1e-8)


def test_finite_difference_path_agrees_with_closed_form():
    fd_metric = _fd_only_sphere(radius=1.0)
    exact_metric = metric_family("sphere", radius=1.0)
    for point in ([1.0, 1.0], [2.0, 4.0]):
        fd_bundle = curvature(fd_metric, point)
        exact_bundle = curvature(exact_metric, point)
        assert abs(fd_bundle.scalar - exact_bundle.scalar) < 1e-4
        np.testing.assert_allclose(fd_bundle.ricci, exact_bundle.ricci, atol=1e-4)


def test_covariant_constancy_of_the_metric():
    assert covariant_constancy_check(metric_family("euclidean"), [1.0, 1.0]) == 0.0
    for point in SPHERE_POINTS:
        assert covariant_constancy_check(metric_family("sphere"), point) < 1e-10
    fd_metric = _fd_only_sphere(radius=1.5)
    assert covariant_constancy_check(fd_metric, [1.3, 2.0]) < 1e-5


def test_finite_difference_path_enforces_an_interior_margin():
    fd_metric = _fd_only_sphere()
    with pytest.raises(ValidationError):
        curvature(fd_metric, [1e-4, 1.0])
    # the closed-form sphere needs no margin at the same point, but the
    # coordinate degeneracy at the pole is still outside the open chart
    with pytest.raises(ValidationError):
        curvature(metric_family("sphere"), [0.0, 1.0])


def test_three_dimensional_flat_chart():
    metric = metric_family("euclidean", dimension=3)
    bundle = curvature(metric, [0.2, -0.4, 1.0])
    assert bundle.scalar == pytest.approx(0.0, abs=1e-12)
    assert bundle.riemann.shape == (3, 3, 3, 3)


# ---------------------------------------------------------------------------
# tensor Laplacians
# ---------------------------------------------------------------------------


def test_tensor_laplacian_of_constant_one_form_is_zero_on_flat_charts():
    metric = metric_family("euclidean")
    field = AlternatingTensorField(1, lambda pts: np.broadcast_to(
        np.array([1.0, -2.0]), np.asarray(pts).shape[:-1] + (2,)).copy())
    np.testing.assert_allclose(derham_laplacian_tensor(metric, field, [0.5, 0.5]),
                               0.0, atol=1e-10)


def test_tensor_laplacian_of_sine_one_form_on_flat_chart():
    metric = metric_family("euclidean")
    k = 2.0 * np.pi

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2,))
        out[..., 0] = np.sin(k * pts[..., 0])
        return out

    def d_comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = k * np.cos(k * pts[..., 0])
        return out

    def dd_comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0] = -k * k * np.sin(k * pts[..., 0])
        return out

    field = AlternatingTensorField(1, comp, d_comp, dd_comp)
    for x in (0.1, 0.37, 0.8):
        out = derham_laplacian_tensor(metric, field, [x, 0.0])
        assert out[0] == pytest.approx(k * k * np.sin(k * x), rel=1e-10, abs=1e-10)
        assert out[1] == pytest.approx(0.0, abs=1e-10)


def test_tensor_laplacian_of_area_form_coefficient_on_flat_chart():
    metric = metric_family("euclidean")
    k = 2.0 * np.pi

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        f = np.sin(k * pts[..., 0])
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 1] = f
        out[..., 1, 0] = -f
        return out

    field = AlternatingTensorField(2, comp, fd_step=1e-4)
    out = derham_laplacian_tensor(metric, field, [0.3, 0.0])
    assert out[0, 1] == pytest.approx(k * k * np.sin(k * 0.3), rel=1e-5)
    np.testing.assert_allclose(out, -out.T, atol=1e-6)


def test_alternating_field_validation():
    with pytest.raises(ValidationError):
        AlternatingTensorField(3, lambda pts: None)
    symmetric = AlternatingTensorField(2, lambda pts: np.broadcast_to(
        np.eye(2), np.asarray(pts).shape[:-1] + (2, 2)).copy())
    with pytest.raises(ValidationError):
        symmetric.validate_on(metric_family("euclidean"))


def test_metric_laplacian_reproduces_ricci_on_reference_charts():
    # flat charts: both sides vanish
    for family, point in (("euclidean", [0.3, -1.2]), ("polar_plane", [1.7, 2.5]),
                          ("flat_torus", [2.0, 3.1])):
        metric = metric_family(family)
        np.testing.assert_allclose(laplacian_of_metric(metric, point), 0.0, atol=1e-9)
    # round charts: the Laplacian of the metric equals the Ricci tensor
    for radius in (1.0, 2.0):
        metric = metric_family("sphere", radius=radius)
        for point in SPHERE_POINTS:
            lap = laplacian_of_metric(metric, point)
            bundle = curvature(metric, point)
            np.testing.assert_allclose(lap, bundle.ricci, atol=1e-10)
            np.testing.assert_allclose(lap, metric.metric(point) / radius**2, atol=1e-9)


# ---------------------------------------------------------------------------
# curvature action
# ---------------------------------------------------------------------------


def test_sphere_action_is_eight_pi_for_any_radius():
    actions = [hilbert_action(metric_family("sphere", radius=r), (200, 400))
               for r in (1.0, 2.0)]
    for action in actions:
        assert abs(action - 8.0 * np.pi) < 1e-3 * 8.0 * np.pi
    # the integrand 2 sin(theta) is radius-free, so the sums agree exactly
    assert actions[0] == pytest.approx(actions[1], rel=1e-14)


def test_flat_torus_action_vanishes():
    assert abs(hilbert_action(metric_family("flat_torus"), (32, 32))) < 1e-10


def test_conformal_bump_preserves_the_total_curvature():
    base = hilbert_action(metric_family("sphere", radius=1.0), (200, 64))
    bumped = hilbert_action(metric_family("sphere_bump", radius=1.0, epsilon=0.05),
                            (200, 64))
    assert abs(bumped - base) < 1e-2 * abs(base)
    # the bump shifts curvature around but cancels node-by-node in pairs
    assert abs(bumped - base) < 1e-9


def test_curvature_samples_shares_the_action_lattice():
    metric = metric_family("sphere", radius=1.0)
    counts = (40, 16)
    samples = curvature_samples(metric, counts)
    assert samples["points"].shape == (40, 16, 2)
    assert samples["scalar"].shape == (40, 16)
    assert samples["ricci"].shape == (40, 16, 2, 2)
    np.testing.assert_allclose(samples["scalar"], 2.0, atol=1e-10)
    cell = (np.pi / 40) * (2.0 * np.pi / 16)
    recomputed = float(np.sum(samples["scalar"] * samples["sqrt_det"]) * cell)
    assert recomputed == pytest.approx(hilbert_action(metric, counts), rel=1e-13)


def test_action_quadrature_validation():
    metric = metric_family("sphere")
    with pytest.raises(ValidationError):
        hilbert_action(metric, (200,))
    with pytest.raises(ValidationError):
        hilbert_action(metric, (1, 16))


# ---------------------------------------------------------------------------
# families and constructors
# ---------------------------------------------------------------------------


def test_metric_family_dispatch():
    assert set(METRIC_FAMILIES) == {"euclidean", "polar_plane", "sphere",
                                    "flat_torus", "sphere_bump"}
    assert metric_family("sphere", radius=2.0).dimension == 2
    with pytest.raises(ValidationError):
        metric_family("hyperbolic")
    with pytest.raises(ValidationError):
        metric_family("sphere", radius=-1.0)


def test_metric_constructor_validation():
    comp = lambda pts: np.broadcast_to(np.eye(2), np.asarray(pts).shape[:-1] + (2, 2)).copy()
    with pytest.raises(ValidationError):
        ParametrizedMetric(2, ((0.0, 1.0),), comp)  # chart/dimension mismatch
    with pytest.raises(ValidationError):
        ParametrizedMetric(2, ((0.0, 1.0), (1.0, 1.0)), comp)  # empty interval

    def indefinite(pts):
        out = np.broadcast_to(np.diag([1.0, -1.0]),
                              np.asarray(pts).shape[:-1] + (2, 2)).copy()
        return out

    with pytest.raises(ValidationError):
        ParametrizedMetric(2, ((0.0, 1.0), (0.0, 1.0)), indefinite)


def test_conformal_scale_requires_closed_form_base():
    fd_metric = _fd_only_sphere()
    zero = lambda pts: np.zeros(np.asarray(pts).shape[:-1])
    zero_d = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (2,))
    zero_dd = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (2, 2))
    with pytest.raises(ValidationError):
        conformal_scale(fd_metric, zero, zero_d, zero_dd)
