"""Riemannian curvature on chart patches, tensor Laplacians, and the
curvature action.

Conventions: metric signature (+,+); Christoffel symbols
Gamma^a_bc = (1/2) g^ad (d_b g_dc + d_c g_db - d_d g_bc); Riemann tensor
R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db
- Gamma^a_de Gamma^e_cb; Ricci R_bd = R^a_bad; scalar R = g^bd R_bd. With
these signs the unit sphere has scalar curvature +2.

The tensor Laplacian follows the Weitzenboeck shape
    (Delta alpha)_K = -(rough Laplacian) + Ricci coupling + (rank 2 only)
    a curvature sandwich term,
with the relative signs of the coupling terms pinned, once and for all,
by requiring Delta g = Ricci on constant-curvature charts. On 1-forms the
pinned choice reduces to the familiar -nabla^2 + Ric, so flat charts give
the componentwise positive Laplacian.

Metric families either supply closed-form first and second derivatives or
fall back to fourth-order central differences with an absolute step.
All evaluators accept batched point arrays of shape (..., dim).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

FD_STEP_DEFAULT = 1e-3
PD_SAMPLES_PER_AXIS = 4

__all__ = [
    "ParametrizedMetric",
    "CurvatureBundle",
    "AlternatingTensorField",
    "christoffel",
    "curvature",
    "covariant_constancy_check",
    "derham_laplacian_tensor",
    "laplacian_of_metric",
    "hilbert_action",
    "curvature_samples",
    "conformal_scale",
    "metric_family",
    "METRIC_FAMILIES",
]


# ---------------------------------------------------------------------------
# finite-difference stencils (fourth order) for batched array-valued callables

def _shift(pts: np.ndarray, axis: int, amount: float) -> np.ndarray:
    out = np.array(pts, dtype=float, copy=True)
    out[..., axis] += amount
    return out


def _fd_first(fn: Callable, pts: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (-fn(_shift(pts, axis, 2 * h)) + 8.0 * fn(_shift(pts, axis, h))
            - 8.0 * fn(_shift(pts, axis, -h)) + fn(_shift(pts, axis, -2 * h))) / (12.0 * h)


def _fd_second_diag(fn: Callable, pts: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (-fn(_shift(pts, axis, 2 * h)) + 16.0 * fn(_shift(pts, axis, h))
            - 30.0 * fn(pts) + 16.0 * fn(_shift(pts, axis, -h))
            - fn(_shift(pts, axis, -2 * h))) / (12.0 * h * h)


def _fd_gradient(fn: Callable, pts: np.ndarray, dim: int, h: float) -> np.ndarray:
    """Stack of d/dx_c fn, derivative axis right after the batch axes."""
    cols = [_fd_first(fn, pts, c, h) for c in range(dim)]
    return np.stack(cols, axis=pts.ndim - 1)


def _fd_hessian(fn: Callable, pts: np.ndarray, dim: int, h: float) -> np.ndarray:
    """Stack of d^2/dx_c dx_e fn, symmetrized in (c, e)."""
    batch = pts.ndim - 1
    sample = fn(pts)
    out = np.empty(pts.shape[:-1] + (dim, dim) + sample.shape[batch:])
    idx = (slice(None),) * batch
    for c in range(dim):
        out[idx + (c, c)] = _fd_second_diag(fn, pts, c, h)
        for e in range(c + 1, dim):
            mixed = _fd_first(lambda q: _fd_first(fn, q, e, h), pts, c, h)
            out[idx + (c, e)] = mixed
            out[idx + (e, c)] = mixed
    return out


# ---------------------------------------------------------------------------
# metric charts

@dataclass(frozen=True)
class ParametrizedMetric:
    """Metric components on an open chart box.

    components maps points (..., dim) to (..., dim, dim). When the
    closed-form derivative callables are absent, derivatives come from
    central differences with the given absolute step.
    layouts: d_components -> (..., c, a, b) = d_c g_ab;
    dd_components -> (..., c, e, a, b) = d_c d_e g_ab.
    """

    dimension: int
    chart: tuple[tuple[float, float], ...]
    components: Callable
    d_components: Callable | None = None
    dd_components: Callable | None = None
    fd_step: float = FD_STEP_DEFAULT
    name: str = ""

    def __post_init__(self):
        if self.dimension < 1 or len(self.chart) != self.dimension:
            raise ValidationError("chart bounds must match the dimension")
        if any(not (lo < hi) for lo, hi in self.chart):
            raise ValidationError("chart intervals must be nonempty")
        if not (self.fd_step > 0):
            raise ValidationError("fd_step must be positive")
        axes = [np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), PD_SAMPLES_PER_AXIS)
                for lo, hi in self.chart]
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        g = self.metric(pts)
        if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-10):
            raise ValidationError("metric samples are not symmetric")
        if np.any(np.linalg.eigvalsh(g)[..., 0] <= 0):
            raise ValidationError("metric samples are not positive definite")

    def metric(self, pts) -> np.ndarray:
        return np.asarray(self.components(np.asarray(pts, dtype=float)), dtype=float)

    def inverse(self, pts) -> np.ndarray:
        return np.linalg.inv(self.metric(pts))

    def d_metric(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.d_components is not None:
            return np.asarray(self.d_components(pts), dtype=float)
        return _fd_gradient(self.metric, pts, self.dimension, self.fd_step)

    def dd_metric(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.dd_components is not None:
            return np.asarray(self.dd_components(pts), dtype=float)
        return _fd_hessian(self.metric, pts, self.dimension, self.fd_step)

    def interior_margin(self) -> float:
        closed_form = self.d_components is not None and self.dd_components is not None
        return 0.0 if closed_form else 2.5 * self.fd_step

    def require_interior(self, pts, extra_margin: float = 0.0) -> None:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        margin = self.interior_margin() + extra_margin
        for axis, (lo, hi) in enumerate(self.chart):
            x = pts[..., axis]
            if np.any(x <= lo + margin) or np.any(x >= hi - margin):
                raise ValidationError(
                    f"point leaves the chart interior (axis {axis}, margin {margin})")


# ---------------------------------------------------------------------------
# curvature pipeline (batched)

def _christoffel_terms(metric: ParametrizedMetric, pts: np.ndarray):
    g = metric.metric(pts)
    ginv = np.linalg.inv(g)
    dg = metric.d_metric(pts)
    s = (np.einsum("...bdc->...dbc", dg) + np.einsum("...cdb->...dbc", dg) - dg)
    gamma = 0.5 * np.einsum("...ad,...dbc->...abc", ginv, s)
    return g, ginv, dg, s, gamma


def _curvature_fields(metric: ParametrizedMetric, pts: np.ndarray) -> dict:
    g, ginv, dg, s, gamma = _christoffel_terms(metric, pts)
    ddg = metric.dd_metric(pts)
    dginv = -np.einsum("...ap,...epq,...qb->...eab", ginv, dg, ginv)
    ds = (np.einsum("...ebdc->...edbc", ddg) + np.einsum("...ecdb->...edbc", ddg)
          - np.einsum("...edbc->...edbc", ddg))
    dgamma = 0.5 * (np.einsum("...ead,...dbc->...eabc", dginv, s)
                    + np.einsum("...ad,...edbc->...eabc", ginv, ds))
    riemann = (np.einsum("...cadb->...abcd", dgamma)
               - np.einsum("...dacb->...abcd", dgamma)
               + np.einsum("...ace,...edb->...abcd", gamma, gamma)
               - np.einsum("...ade,...ecb->...abcd", gamma, gamma))
    ricci = np.einsum("...abad->...bd", riemann)
    scalar = np.einsum("...bd,...bd->...", ginv, ricci)
    return {"metric": g, "inverse": ginv, "d_metric": dg, "christoffel": gamma,
            "d_christoffel": dgamma, "riemann": riemann, "ricci": ricci,
            "scalar": scalar}


@dataclass(frozen=True)
class CurvatureBundle:
    point: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float


def christoffel(metric: ParametrizedMetric, x) -> np.ndarray:
    """Gamma^a_bc at a single chart point, layout [a, b, c]."""
    x = np.asarray(x, dtype=float)
    metric.require_interior(x)
    return _christoffel_terms(metric, x[None, :])[4][0]


def curvature(metric: ParametrizedMetric, x) -> CurvatureBundle:
    """Christoffel, Riemann, Ricci, and scalar curvature at a chart point."""
    x = np.asarray(x, dtype=float)
    metric.require_interior(x)
    f = _curvature_fields(metric, x[None, :])
    return CurvatureBundle(x, f["christoffel"][0], f["riemann"][0],
                           f["ricci"][0], float(f["scalar"][0]))


def covariant_constancy_check(metric: ParametrizedMetric, x) -> float:
    """max |g_ab;c| at a point; zero for the Levi-Civita connection."""
    x = np.asarray(x, dtype=float)
    metric.require_interior(x)
    g, _, dg, _, gamma = _christoffel_terms(metric, x[None, :])
    nabla = (dg - np.einsum("...eca,...eb->...cab", gamma, g)
             - np.einsum("...ecb,...ae->...cab", gamma, g))
    return float(np.max(np.abs(nabla)))


# ---------------------------------------------------------------------------
# tensor fields and the pinned Weitzenboeck-shape Laplacian

@dataclass(frozen=True)
class AlternatingTensorField:
    """Rank 1 or 2 covariant tensor field on a chart.

    components maps (..., dim) to (..., dim) or (..., dim, dim); rank-2
    fields must be antisymmetric (checked on chart samples). Optional
    closed-form derivatives follow the metric layout conventions.
    """

    rank: int
    components: Callable
    d_components: Callable | None = None
    dd_components: Callable | None = None
    fd_step: float = FD_STEP_DEFAULT

    def __post_init__(self):
        if self.rank not in (1, 2):
            raise ValidationError("rank must be 1 or 2")

    def validate_on(self, metric: ParametrizedMetric) -> None:
        if self.rank != 2:
            return
        axes = [np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), 3)
                for lo, hi in metric.chart]
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        a = np.asarray(self.components(pts), dtype=float)
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a + np.swapaxes(a, -1, -2))) > 1e-12 * scale:
            raise ValidationError("rank-2 field is not antisymmetric")

    def value(self, pts) -> np.ndarray:
        return np.asarray(self.components(np.asarray(pts, dtype=float)), dtype=float)

    def d_value(self, pts, dim: int) -> np.ndarray:
        if self.d_components is not None:
            return np.asarray(self.d_components(pts), dtype=float)
        return _fd_gradient(self.value, pts, dim, self.fd_step)

    def dd_value(self, pts, dim: int) -> np.ndarray:
        if self.dd_components is not None:
            return np.asarray(self.dd_components(pts), dtype=float)
        return _fd_hessian(self.value, pts, dim, self.fd_step)


def _weitzenboeck(metric: ParametrizedMetric, rank: int, alpha: np.ndarray,
                  dalpha: np.ndarray, ddalpha: np.ndarray, fields: dict) -> np.ndarray:
    """Core template: rough Laplacian plus pinned curvature couplings."""
    ginv = fields["inverse"]
    gamma = fields["christoffel"]
    dgamma = fields["d_christoffel"]
    ricci_mixed = np.einsum("...ha,...ak->...hk", ginv, fields["ricci"])

    if rank == 1:
        grad = dalpha - np.einsum("...eck,...e->...ck", gamma, alpha)
        dgrad = (ddalpha
                 - np.einsum("...deck,...e->...dck", dgamma, alpha)
                 - np.einsum("...eck,...de->...dck", gamma, dalpha))
        hess = (dgrad
                - np.einsum("...edc,...ek->...dck", gamma, grad)
                - np.einsum("...edk,...ce->...dck", gamma, grad))
        rough = -np.einsum("...dc,...dck->...k", ginv, hess)
        return rough + np.einsum("...hk,...h->...k", ricci_mixed, alpha)

    grad = (dalpha
            - np.einsum("...eck,...el->...ckl", gamma, alpha)
            - np.einsum("...ecl,...ke->...ckl", gamma, alpha))
    dgrad = (ddalpha
             - np.einsum("...deck,...el->...dckl", dgamma, alpha)
             - np.einsum("...eck,...del->...dckl", gamma, dalpha)
             - np.einsum("...decl,...ke->...dckl", dgamma, alpha)
             - np.einsum("...ecl,...dke->...dckl", gamma, dalpha))
    hess = (dgrad
            - np.einsum("...edc,...ekl->...dckl", gamma, grad)
            - np.einsum("...edk,...cel->...dckl", gamma, grad)
            - np.einsum("...edl,...cke->...dckl", gamma, grad))
    rough = -np.einsum("...dc,...dckl->...kl", ginv, hess)

    single = (np.einsum("...hk,...hl->...kl", ricci_mixed, alpha)
              + np.einsum("...hl,...kh->...kl", ricci_mixed, alpha))
    riemann_low = np.einsum("...pe,...eaqb->...paqb", fields["metric"], fields["riemann"])
    sandwich = np.einsum("...hp,...iq,...pkql,...hi->...kl",
                         ginv, ginv, riemann_low, alpha)
    # relative sign of the sandwich term pinned by Delta g = Ricci
    return rough + single - sandwich


def derham_laplacian_tensor(metric: ParametrizedMetric, field: AlternatingTensorField, x) -> np.ndarray:
    """Tensor Laplacian of an alternating field at a chart point."""
    field.validate_on(metric)
    x = np.asarray(x, dtype=float)
    extra = 0.0 if field.d_components is not None else 2.5 * field.fd_step
    metric.require_interior(x, extra_margin=extra)
    pts = x[None, :]
    fields = _curvature_fields(metric, pts)
    alpha = field.value(pts)
    dalpha = field.d_value(pts, metric.dimension)
    ddalpha = field.dd_value(pts, metric.dimension)
    return _weitzenboeck(metric, field.rank, alpha, dalpha, ddalpha, fields)[0]


def laplacian_of_metric(metric: ParametrizedMetric, x) -> np.ndarray:
    """The rank-2 Laplacian template applied verbatim to the metric itself.

    The rough part vanishes by metric constancy, leaving the curvature
    couplings; on constant-curvature charts the result equals the Ricci
    tensor.
    """
    x = np.asarray(x, dtype=float)
    metric.require_interior(x)
    pts = x[None, :]
    fields = _curvature_fields(metric, pts)
    alpha = fields["metric"]
    dalpha = fields["d_metric"]
    ddalpha = metric.dd_metric(pts)
    return _weitzenboeck(metric, 2, alpha, dalpha, ddalpha, fields)[0]


# ---------------------------------------------------------------------------
# curvature action

def _quadrature_lattice(metric: ParametrizedMetric, counts):
    """Midpoint nodes over the chart box: ((n0, ..., d) points, cell volume)."""
    counts = tuple(int(n) for n in counts)
    if len(counts) != metric.dimension or any(n < 2 for n in counts):
        raise ValidationError("need at least 2 quadrature cells per axis")
    axes = []
    volume = 1.0
    for (lo, hi), n in zip(metric.chart, counts):
        step = (hi - lo) / n
        axes.append(lo + step * (np.arange(n) + 0.5))
        volume *= step
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return pts, volume


def curvature_samples(metric: ParametrizedMetric, counts) -> dict:
    """Curvature fields tabulated on the midpoint quadrature lattice.

    Returns {"points": (n0, ..., d), "sqrt_det": (n0, ...),
    "scalar": (n0, ...), "ricci": (n0, ..., d, d)} — the same nodes
    hilbert_action integrates over.
    """
    pts, _ = _quadrature_lattice(metric, counts)
    fields = _curvature_fields(metric, pts)
    dets = np.linalg.det(fields["metric"])
    if np.any(dets <= 0):
        raise ValidationError("metric determinant is not positive on quadrature nodes")
    return {"points": pts, "sqrt_det": np.sqrt(dets),
            "scalar": fields["scalar"], "ricci": fields["ricci"]}


def hilbert_action(metric: ParametrizedMetric, counts) -> float:
    """Midpoint-quadrature sum of R sqrt(det g) over the chart box."""
    pts, volume = _quadrature_lattice(metric, counts)
    fields = _curvature_fields(metric, pts)
    dets = np.linalg.det(fields["metric"])
    if np.any(dets <= 0):
        raise ValidationError("metric determinant is not positive on quadrature nodes")
    return float(np.sum(fields["scalar"] * np.sqrt(dets)) * volume)


# ---------------------------------------------------------------------------
# built-in families

def _diag_metric(values_fn):
    def components(pts):
        pts = np.asarray(pts, dtype=float)
        vals = values_fn(pts)
        out = np.zeros(pts.shape[:-1] + (len(vals), len(vals)))
        for k, v in enumerate(vals):
            out[..., k, k] = v
        return out
    return components


def euclidean_metric(dimension: int = 2, extent: float = 10.0) -> ParametrizedMetric:
    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(np.eye(dimension),
                               pts.shape[:-1] + (dimension, dimension)).copy()

    zero_d = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (dimension,) * 3)
    zero_dd = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (dimension,) * 4)
    return ParametrizedMetric(dimension, ((-extent, extent),) * dimension,
                              comp, zero_d, zero_dd, name="euclidean")


def polar_plane_metric(r_min: float = 0.05, r_max: float = 10.0) -> ParametrizedMetric:
    comp = _diag_metric(lambda pts: (np.ones_like(pts[..., 0]), pts[..., 0] ** 2))

    def d_comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = 2.0 * pts[..., 0]
        return out

    def dd_comp(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2, 2, 2))
        out[..., 0, 0, 1, 1] = 2.0
        return out

    return ParametrizedMetric(2, ((r_min, r_max), (0.0, 2.0 * np.pi)),
                              comp, d_comp, dd_comp, name="polar_plane")


def sphere_metric(radius: float = 1.0) -> ParametrizedMetric:
    if not (radius > 0):
        raise ValidationError("radius must be positive")
    r2 = radius * radius
    comp = _diag_metric(lambda pts: (np.full_like(pts[..., 0], r2),
                                     r2 * np.sin(pts[..., 0]) ** 2))

    def d_comp(pts):
        pts = np.asarray(pts, dtype=float)
        th = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = r2 * np.sin(2.0 * th)
        return out

    def dd_comp(pts):
        pts = np.asarray(pts, dtype=float)
        th = pts[..., 0]
        out = np.zeros(pts.shape[:-1] + (2, 2, 2, 2))
        out[..., 0, 0, 1, 1] = 2.0 * r2 * np.cos(2.0 * th)
        return out

    return ParametrizedMetric(2, ((0.0, np.pi), (0.0, 2.0 * np.pi)),
                              comp, d_comp, dd_comp, name=f"sphere(r={radius})")


def flat_torus_metric(lengths=(2.0 * np.pi, 2.0 * np.pi)) -> ParametrizedMetric:
    lx, ly = lengths

    def comp(pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()

    zero_d = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (2, 2, 2))
    zero_dd = lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (2, 2, 2, 2))
    return ParametrizedMetric(2, ((0.0, lx), (0.0, ly)),
                              comp, zero_d, zero_dd, name="flat_torus")


def conformal_scale(base: ParametrizedMetric, u: Callable, du: Callable,
                    ddu: Callable, name: str = "") -> ParametrizedMetric:
    """e^u times a base metric, with derivatives composed by the product rule.

    du -> (..., c); ddu -> (..., c, e). Requires the base to carry
    closed-form derivatives.
    """
    if base.d_components is None or base.dd_components is None:
        raise ValidationError("conformal scaling needs closed-form base derivatives")

    def comp(pts):
        return np.exp(u(pts))[..., None, None] * base.metric(pts)

    def d_comp(pts):
        s = np.exp(u(pts))[..., None, None, None]
        g = base.metric(pts)[..., None, :, :]
        dg = base.d_metric(pts)
        return s * (du(pts)[..., :, None, None] * g + dg)

    def dd_comp(pts):
        s = np.exp(u(pts))[..., None, None, None, None]
        g = base.metric(pts)[..., None, None, :, :]
        dg = base.d_metric(pts)
        duv = du(pts)
        dduv = ddu(pts)
        cross = (duv[..., :, None, None, None] * duv[..., None, :, None, None]
                 + dduv[..., :, :, None, None])
        mixed = (duv[..., :, None, None, None] * dg[..., None, :, :, :]
                 + duv[..., None, :, None, None] * dg[..., :, None, :, :])
        return s * (cross * g + mixed + base.dd_metric(pts))

    return ParametrizedMetric(base.dimension, base.chart, comp, d_comp, dd_comp,
                              name=name or f"conformal({base.name})")


def sphere_bump_metric(radius: float = 1.0, epsilon: float = 0.1) -> ParametrizedMetric:
    """Sphere metric rescaled by exp(2 eps cos(theta)); same total curvature."""
    base = sphere_metric(radius)

    def u(pts):
        return 2.0 * epsilon * np.cos(np.asarray(pts, dtype=float)[..., 0])

    def du(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2,))
        out[..., 0] = -2.0 * epsilon * np.sin(pts[..., 0])
        return out

    def ddu(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = -2.0 * epsilon * np.cos(pts[..., 0])
        return out

    return conformal_scale(base, u, du, ddu,
                           name=f"sphere_bump(r={radius},eps={epsilon})")


METRIC_FAMILIES = {
    "euclidean": euclidean_metric,
    "polar_plane": polar_plane_metric,
    "sphere": sphere_metric,
    "flat_torus": flat_torus_metric,
    "sphere_bump": sphere_bump_metric,
}


def metric_family(name: str, **params) -> ParametrizedMetric:
    if name not in METRIC_FAMILIES:
        raise ValidationError(f"unknown metric family {name!r}")
    return METRIC_FAMILIES[name](**params)
