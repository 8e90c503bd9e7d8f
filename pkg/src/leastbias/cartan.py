"""Moving-frame structure equations on two-dimensional charts and a
roughness-descent explorer over orthonormal frame fields.

A frame configuration is a coframe field e^mu = a^mu_i dx^i together with
an optional connection one-form omega^mu_nu = b^munu_i dx^i. The first
structure equation gives the torsion two-form
    Omega^mu = de^mu + omega^mu_nu wedge e^nu,
the second gives the curvature two-form
    Omega^mu_nu = d omega^mu_nu + omega^mu_kappa wedge omega^kappa_nu;
both are reported through their dx^1 wedge dx^2 coefficients. Exterior
derivatives of the supplied callables come from fourth-order central
differences.

The roughness functional is the Dirichlet energy of the coframe
coefficient fields over the chart box — a least-bias score that vanishes
exactly on constant frames. The explorer minimizes it over pointwise
orthogonal frames on fully periodic charts: projected gradient descent,
with orthogonality restored after every step by the polar factor
(nearest orthogonal matrix) and a backtracking search that only ever
accepts a decrease, so descent histories are monotone by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConvergenceError, ValidationError
from .grids import ScalarFieldOnGrid, UniformGrid, fd_laplacian

FD_STEP_DEFAULT = 1e-3

__all__ = [
    "FrameConfiguration",
    "TorsionDescentResult",
    "structure_torsion",
    "structure_curvature",
    "levi_civita_connection",
    "torsion_functional",
    "torsion_functional_gradient",
    "minimize_torsion_functional",
    "coframe_family",
    "COFRAME_FAMILIES",
]


def _shift(pts: np.ndarray, axis: int, amount: float) -> np.ndarray:
    out = np.array(pts, dtype=float, copy=True)
    out[..., axis] += amount
    return out


def _d1(fn: Callable, pts: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (-fn(_shift(pts, axis, 2 * h)) + 8.0 * fn(_shift(pts, axis, h))
            - 8.0 * fn(_shift(pts, axis, -h)) + fn(_shift(pts, axis, -2 * h))) / (12.0 * h)


@dataclass(frozen=True)
class FrameConfiguration:
    """Coframe field with an optional connection on a 2-D chart box.

    coframe maps points (..., 2) to coefficient arrays (..., 2, 2) with
    layout [mu, i] in e^mu = a^mu_i dx^i; connection, when present, maps
    to (..., 2, 2, 2) with layout [mu, nu, i] in omega^mu_nu = b^munu_i
    dx^i. Periodic flags mark chart axes whose callables wrap around, so
    difference stencils may cross those edges.
    """

    coframe: Callable
    chart: tuple[tuple[float, float], tuple[float, float]]
    connection: Callable | None = None
    periodic: tuple[bool, bool] = (False, False)
    fd_step: float = FD_STEP_DEFAULT
    name: str = ""

    def __post_init__(self):
        if len(self.chart) != 2 or any(not (lo < hi) for lo, hi in self.chart):
            raise ValidationError("chart must be two nonempty intervals")
        if len(self.periodic) != 2:
            raise ValidationError("periodic flags must cover both axes")
        if not (self.fd_step > 0):
            raise ValidationError("fd_step must be positive")
        axes = [np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), 3)
                for lo, hi in self.chart]
        pts = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
        a = self.coframe_at(pts)
        if a.shape[-2:] != (2, 2):
            raise ValidationError("coframe must produce 2x2 coefficient arrays")
        if np.any(np.abs(np.linalg.det(a)) < 1e-12):
            raise ValidationError("coframe is degenerate on chart samples")

    def coframe_at(self, pts) -> np.ndarray:
        return np.asarray(self.coframe(np.asarray(pts, dtype=float)), dtype=float)

    def connection_at(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.connection is None:
            return np.zeros(pts.shape[:-1] + (2, 2, 2))
        return np.asarray(self.connection(pts), dtype=float)

    def require_interior(self, pts) -> None:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        margin = 2.5 * self.fd_step
        for axis, (lo, hi) in enumerate(self.chart):
            if self.periodic[axis]:
                continue
            x = pts[..., axis]
            if np.any(x <= lo + margin) or np.any(x >= hi - margin):
                raise ValidationError(
                    f"point too close to the chart edge on axis {axis}")


def _exterior_coefficient(fn: Callable, pts: np.ndarray, h: float) -> np.ndarray:
    """dx^1 wedge dx^2 coefficient of d(one-form), last axis = form index."""
    d = [_d1(fn, pts, axis, h) for axis in range(2)]
    return d[0][..., 1] - d[1][..., 0]


def structure_torsion(config: FrameConfiguration, x) -> np.ndarray:
    """Torsion two-form coefficients T^mu at a point (or batch of points)."""
    x = np.asarray(x, dtype=float)
    config.require_interior(x)
    exterior = _exterior_coefficient(config.coframe_at, x, config.fd_step)
    a = config.coframe_at(x)
    b = config.connection_at(x)
    wedge = (np.einsum("...mn,...n->...m", b[..., 0], a[..., 1])
             - np.einsum("...mn,...n->...m", b[..., 1], a[..., 0]))
    return exterior + wedge


def structure_curvature(config: FrameConfiguration, x) -> np.ndarray:
    """Curvature two-form coefficients R^mu_nu at a point (or batch)."""
    x = np.asarray(x, dtype=float)
    config.require_interior(x)
    exterior = _exterior_coefficient(config.connection_at, x, config.fd_step)
    b = config.connection_at(x)
    wedge = (np.einsum("...mk,...kn->...mn", b[..., 0], b[..., 1])
             - np.einsum("...mk,...kn->...mn", b[..., 1], b[..., 0]))
    return exterior + wedge


def levi_civita_connection(config: FrameConfiguration) -> FrameConfiguration:
    """The unique torsion-free so(2)-valued connection for the coframe.

    Declares the coframe orthonormal, i.e. solves de^mu + omega^mu_nu
    wedge e^nu = 0 for antisymmetric omega; the 2x2 linear system has
    determinant det(a) and so is solvable wherever the coframe is
    nondegenerate.
    """

    def connection(pts):
        pts = np.asarray(pts, dtype=float)
        a = config.coframe_at(pts)
        c = _exterior_coefficient(config.coframe_at, pts, config.fd_step)
        mat = np.empty(pts.shape[:-1] + (2, 2))
        mat[..., 0, 0] = -a[..., 1, 1]
        mat[..., 0, 1] = a[..., 1, 0]
        mat[..., 1, 0] = a[..., 0, 1]
        mat[..., 1, 1] = -a[..., 0, 0]
        sigma = np.linalg.solve(mat, c[..., None])[..., 0]
        b = np.zeros(pts.shape[:-1] + (2, 2, 2))
        b[..., 0, 1, :] = sigma
        b[..., 1, 0, :] = -sigma
        return b

    return replace(config, connection=connection,
                   name=(config.name + "+levi_civita") if config.name else "levi_civita")


# ---------------------------------------------------------------------------
# roughness functional and projected descent

def _functional_lattice(config: FrameConfiguration, resolution: int):
    """Sample points and spacings; midpoint-offset nodes on open axes."""
    if resolution < 8:
        raise ValidationError("resolution must be at least 8")
    axes = []
    spacings = []
    for (lo, hi), wraps in zip(config.chart, config.periodic):
        h = (hi - lo) / resolution
        offset = 0.0 if wraps else 0.5
        axes.append(lo + h * (np.arange(resolution) + offset))
        spacings.append(h)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return pts, tuple(spacings)


def _forward_energy(samples: np.ndarray, spacings, periodic) -> float:
    """Half the summed squared difference quotients times the cell volume.

    On fully periodic lattices this equals (1/2) <a, Lap a> for the
    wrapped difference Laplacian, which is the quadratic form the descent
    gradient differentiates.
    """
    cell = float(np.prod(spacings))
    total = 0.0
    for axis, (h, wraps) in enumerate(zip(spacings, periodic)):
        if wraps:
            diff = np.roll(samples, -1, axis=axis) - samples
        else:
            forward = [slice(None)] * samples.ndim
            backward = [slice(None)] * samples.ndim
            forward[axis] = slice(1, None)
            backward[axis] = slice(None, -1)
            diff = samples[tuple(forward)] - samples[tuple(backward)]
        total += float(np.sum((diff / h) ** 2))
    return 0.5 * total * cell


def torsion_functional(config: FrameConfiguration, resolution: int = 32) -> float:
    """Dirichlet roughness of the coframe coefficients over the chart box.

    Constant frames score zero; a frame rotating through angle
    eps sin(x) on the standard torus scores eps^2 (2 pi)^2 / 2 up to
    O(eps^4) and O(h^2) lattice corrections.
    """
    pts, spacings = _functional_lattice(config, resolution)
    return _forward_energy(config.coframe_at(pts), spacings, config.periodic)


def _descent_grid(config: FrameConfiguration, resolution: int) -> UniformGrid:
    if config.periodic != (True, True):
        raise ValidationError("frame descent needs a fully periodic chart")
    if resolution < 8:
        raise ValidationError("resolution must be at least 8")
    lengths = tuple(hi - lo for lo, hi in config.chart)
    origin = tuple(lo for lo, _ in config.chart)
    return UniformGrid.periodic_box(lengths, (resolution, resolution), origin=origin)


def _energy_gradient(grid: UniformGrid, samples: np.ndarray) -> np.ndarray:
    cell = grid.cell_volume
    grad = np.empty_like(samples)
    for mu in range(2):
        for i in range(2):
            f = ScalarFieldOnGrid(grid, samples[..., mu, i])
            grad[..., mu, i] = fd_laplacian(f).values * cell
    return grad


def torsion_functional_gradient(config: FrameConfiguration, resolution: int = 32) -> np.ndarray:
    """Gradient of the roughness functional on the periodic sample lattice.

    Shape (resolution, resolution, 2, 2); identically zero exactly when
    every coefficient field is lattice-harmonic, in particular on
    constant frames.
    """
    grid = _descent_grid(config, resolution)
    pts = np.stack(grid.meshgrid(), axis=-1)
    return _energy_gradient(grid, config.coframe_at(pts))


def _nearest_orthogonal(mats: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(mats)
    return u @ vt


def _periodic_bilinear(chart, samples: np.ndarray) -> Callable:
    n0, n1 = samples.shape[0], samples.shape[1]
    (lo0, hi0), (lo1, hi1) = chart
    h0 = (hi0 - lo0) / n0
    h1 = (hi1 - lo1) / n1

    def interpolant(pts):
        pts = np.asarray(pts, dtype=float)
        t0 = (pts[..., 0] - lo0) / h0
        t1 = (pts[..., 1] - lo1) / h1
        i0 = np.floor(t0).astype(int)
        i1 = np.floor(t1).astype(int)
        f0 = (t0 - i0)[..., None, None]
        f1 = (t1 - i1)[..., None, None]
        i0 %= n0
        i1 %= n1
        j0 = (i0 + 1) % n0
        j1 = (i1 + 1) % n1
        return ((1 - f0) * (1 - f1) * samples[i0, i1]
                + f0 * (1 - f1) * samples[j0, i1]
                + (1 - f0) * f1 * samples[i0, j1]
                + f0 * f1 * samples[j0, j1])

    return interpolant


@dataclass(frozen=True)
class TorsionDescentResult:
    configuration: FrameConfiguration
    initial_value: float
    final_value: float
    gradient_norm: float
    history: np.ndarray = field(repr=False)
    gradient_history: np.ndarray = field(repr=False)
    iterations: int
    converged: bool


def minimize_torsion_functional(config: FrameConfiguration, resolution: int = 32,
                                step: float = 0.25, tol: float = 1e-12,
                                max_iterations: int = 500) -> TorsionDescentResult:
    """Projected gradient descent over pointwise-orthogonal coframes.

    Gradient steps on the sampled coefficients are followed by projection
    onto the nearest orthogonal matrix (polar factor via SVD); a
    backtracking search halves the step until the functional decreases,
    so the recorded history is monotone nonincreasing. Convergence means
    the decrease fell below tol * max(1, initial value); exhausting the
    iteration budget first raises ConvergenceError carrying the best
    configuration seen.
    """
    if not (step > 0):
        raise ValidationError("step must be positive")
    grid = _descent_grid(config, resolution)
    pts = np.stack(grid.meshgrid(), axis=-1)
    spacings = grid.spacing
    samples = _nearest_orthogonal(config.coframe_at(pts))
    value = _forward_energy(samples, spacings, (True, True))
    grad = _energy_gradient(grid, samples)
    history = [value]
    gradient_history = [float(np.linalg.norm(grad))]
    floor = tol * max(1.0, abs(value))
    converged = False
    for _ in range(max_iterations):
        eta = step
        improved = False
        while eta > 1e-14:
            trial = _nearest_orthogonal(samples - eta * grad)
            trial_value = _forward_energy(trial, spacings, (True, True))
            if trial_value < value:
                samples, value = trial, trial_value
                improved = True
                break
            eta *= 0.5
        grad = _energy_gradient(grid, samples)
        history.append(value)
        gradient_history.append(float(np.linalg.norm(grad)))
        if not improved or history[-2] - history[-1] <= floor:
            converged = True
            break

    def build(samples_arr):
        return replace(config, coframe=_periodic_bilinear(config.chart, samples_arr),
                       connection=None,
                       name=(config.name + "+descended") if config.name else "descended")

    if not converged:
        raise ConvergenceError("descent exhausted its iteration budget",
                               best=build(samples), residual=history[-2] - history[-1],
                               iterations=len(history) - 1)
    return TorsionDescentResult(build(samples), history[0], value,
                                gradient_history[-1], np.asarray(history),
                                np.asarray(gradient_history), len(history) - 1, True)


# ---------------------------------------------------------------------------
# built-in coframe families

def cartesian_coframe(extent: float = 2.0 * np.pi) -> FrameConfiguration:
    def coframe(pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()

    return FrameConfiguration(coframe, ((0.0, extent), (0.0, extent)),
                              periodic=(True, True), name="cartesian")


def _rotation_coframe(angle_fn: Callable) -> Callable:
    def coframe(pts):
        pts = np.asarray(pts, dtype=float)
        psi = angle_fn(pts)
        out = np.empty(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = np.cos(psi)
        out[..., 0, 1] = -np.sin(psi)
        out[..., 1, 0] = np.sin(psi)
        out[..., 1, 1] = np.cos(psi)
        return out
    return coframe


def perturbed_coframe(epsilon: float = 0.1, mode: int = 1,
                      extent: float = 2.0 * np.pi) -> FrameConfiguration:
    """Identity coframe rotated through angle eps sin(mode 2 pi x / extent)."""
    wavenumber = 2.0 * np.pi * mode / extent
    coframe = _rotation_coframe(
        lambda pts: epsilon * np.sin(wavenumber * pts[..., 0]))
    return FrameConfiguration(coframe, ((0.0, extent), (0.0, extent)),
                              periodic=(True, True), name="perturbed")


def random_rotation_coframe(seed: int = 0, amplitude: float = 0.1, modes: int = 3,
                            extent: float = 2.0 * np.pi) -> FrameConfiguration:
    """Rotation field with a few seeded random Fourier modes — descent fodder."""
    rng = np.random.default_rng(seed)
    base = 2.0 * np.pi / extent
    waves = []
    for _ in range(modes):
        k = rng.integers(-2, 3, size=2)
        if k[0] == 0 and k[1] == 0:
            k[0] = 1
        waves.append((base * k[0], base * k[1], rng.uniform(0, 2.0 * np.pi),
                      rng.uniform(0.5, 1.0)))
    scale = amplitude / sum(w for *_, w in waves)

    def angle(pts):
        psi = np.zeros(pts.shape[:-1])
        for kx, ky, phase, weight in waves:
            psi += weight * np.sin(kx * pts[..., 0] + ky * pts[..., 1] + phase)
        return scale * psi

    return FrameConfiguration(_rotation_coframe(angle),
                              ((0.0, extent), (0.0, extent)),
                              periodic=(True, True), name=f"random_rotation({seed})")


def polar_orthonormal_coframe(r_min: float = 0.05, r_max: float = 10.0) -> FrameConfiguration:
    coframe = _diag_coframe(lambda pts: (np.ones_like(pts[..., 0]), pts[..., 0]))
    return FrameConfiguration(coframe, ((r_min, r_max), (0.0, 2.0 * np.pi)),
                              periodic=(False, True), name="polar_orthonormal")


def sphere_orthonormal_coframe(radius: float = 1.0) -> FrameConfiguration:
    if not (radius > 0):
        raise ValidationError("radius must be positive")
    coframe = _diag_coframe(lambda pts: (np.full_like(pts[..., 0], radius),
                                         radius * np.sin(pts[..., 0])))
    return FrameConfiguration(coframe, ((0.0, np.pi), (0.0, 2.0 * np.pi)),
                              periodic=(False, True), name="sphere_orthonormal")


def _diag_coframe(values_fn):
    def coframe(pts):
        pts = np.asarray(pts, dtype=float)
        v0, v1 = values_fn(pts)
        out = np.zeros(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = v0
        out[..., 1, 1] = v1
        return out
    return coframe


COFRAME_FAMILIES = {
    "cartesian": cartesian_coframe,
    "perturbed": perturbed_coframe,
    "random_rotation": random_rotation_coframe,
    "polar_orthonormal": polar_orthonormal_coframe,
    "sphere_orthonormal": sphere_orthonormal_coframe,
}


def coframe_family(name: str, **params) -> FrameConfiguration:
    if name not in COFRAME_FAMILIES:
        raise ValidationError(f"unknown coframe family {name!r}")
    return COFRAME_FAMILIES[name](**params)
