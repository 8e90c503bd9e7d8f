"""Minimal-surface heights in the small-slope (harmonic) regime.

A film spanning a wire frame is modeled as a height function over a 2-D
lattice whose outermost ring carries the frame values; the interior solves
the 5-point Laplace system by conjugate gradients. Harmonicity is checked
through the discrete mean-value property.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, ValidationError
from .grids import BoundaryKind, ScalarFieldOnGrid, UniformGrid, fd_laplacian

FRAME_FAMILIES: dict[str, Callable] = {
    "constant": lambda x, y: np.ones_like(x),
    "saddle": lambda x, y: x * x - y * y,
    "harmonic_sine": lambda x, y: np.sin(np.pi * x) * np.sinh(np.pi * y),
    "wavy_rim": lambda x, y: np.cos(2 * np.pi * x) - 0.5 * np.sin(2 * np.pi * y),
}

__all__ = [
    "WireFrame",
    "FilmSolution",
    "film_grid",
    "solve_film",
    "mean_value_residual",
    "FRAME_FAMILIES",
]


def film_grid(bounds, counts) -> UniformGrid:
    """Closed-rectangle lattice (boundary ring included) for frame problems."""
    spacing = tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(bounds, counts))
    origin = tuple(lo for lo, _ in bounds)
    return UniformGrid(tuple(counts), spacing,
                       (BoundaryKind.DIRICHLET, BoundaryKind.DIRICHLET), origin)


def _boundary_mask(shape) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return mask


@dataclass(frozen=True)
class WireFrame:
    """Fixed heights on the boundary ring of a 2-D lattice.

    Boundary points are ordered by the row-major scan of the full lattice
    restricted to the ring; CSV exchange uses that index.
    """

    grid: UniformGrid
    boundary_values: np.ndarray

    def __post_init__(self):
        if self.grid.dimension != 2:
            raise ValidationError("wire frames require a 2-D grid")
        nb = int(_boundary_mask(self.grid.shape).sum())
        v = np.asarray(self.boundary_values, dtype=float)
        if v.shape != (nb,):
            raise ValidationError(f"expected {nb} boundary values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("boundary values must be finite")
        object.__setattr__(self, "boundary_values", v)

    @classmethod
    def from_function(cls, grid: UniformGrid, fn: Callable) -> "WireFrame":
        x, y = grid.meshgrid()
        mask = _boundary_mask(grid.shape)
        return cls(grid, np.asarray(fn(x, y), dtype=float)[mask])

    @classmethod
    def from_family(cls, grid: UniformGrid, name: str) -> "WireFrame":
        if name not in FRAME_FAMILIES:
            raise ValidationError(f"unknown frame family {name!r}")
        return cls.from_function(grid, FRAME_FAMILIES[name])

    @classmethod
    def from_csv(cls, grid: UniformGrid, path) -> "WireFrame":
        nb = int(_boundary_mask(grid.shape).sum())
        values = np.full(nb, np.nan)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header] != ["index", "value"]:
                raise ValidationError("frame CSV must have header 'index,value'")
            for row in reader:
                k = int(row[0])
                if not 0 <= k < nb:
                    raise ValidationError(f"boundary index {k} out of range")
                values[k] = float(row[1])
        if np.any(np.isnan(values)):
            raise ValidationError("frame CSV does not cover every boundary point")
        return cls(grid, values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "value"])
            for k, v in enumerate(self.boundary_values):
                writer.writerow([k, repr(float(v))])

    def embed(self) -> np.ndarray:
        """Full-lattice array holding frame values on the ring, zero inside."""
        full = np.zeros(self.grid.shape)
        full[_boundary_mask(self.grid.shape)] = self.boundary_values
        return full


@dataclass(frozen=True)
class FilmSolution:
    height: ScalarFieldOnGrid
    boundary_residual: float
    interior_laplacian_norm: float
    tolerance: float
    iterations: int


def _interior_grid(grid: UniformGrid) -> UniformGrid:
    return UniformGrid(tuple(n - 2 for n in grid.shape), grid.spacing,
                       (BoundaryKind.DIRICHLET, BoundaryKind.DIRICHLET),
                       tuple(o + h for o, h in zip(grid.origin, grid.spacing)))


def solve_film(frame: WireFrame, rtol: float = 1e-12, max_iterations: int | None = None,
               restarts: int = 3) -> FilmSolution:
    """Heights of the discrete harmonic extension of the frame values.

    Conjugate gradients on the interior system, restarted if the recursive
    residual drifts from the directly recomputed one.
    """
    grid = frame.grid
    interior = _interior_grid(grid)
    embedded = frame.embed()
    rhs_full = -fd_laplacian(ScalarFieldOnGrid(grid, embedded)).values
    b = rhs_full[1:-1, 1:-1].copy()

    def apply(x2d: np.ndarray) -> np.ndarray:
        return fd_laplacian(ScalarFieldOnGrid(interior, x2d)).values

    target = rtol * float(np.linalg.norm(b))
    cap = max_iterations if max_iterations is not None else 20 * b.size
    x = np.zeros_like(b)
    total_iterations = 0
    true_norm = np.inf
    for _ in range(restarts + 1):
        r = b - apply(x)
        p = r.copy()
        rs = float(np.sum(r * r))
        while total_iterations < cap and np.sqrt(rs) > target:
            ap = apply(p)
            alpha = rs / float(np.sum(p * ap))
            x += alpha * p
            r -= alpha * ap
            rs_new = float(np.sum(r * r))
            p = r + (rs_new / rs) * p
            rs = rs_new
            total_iterations += 1
        true_norm = float(np.linalg.norm(b - apply(x)))
        if true_norm <= target or total_iterations >= cap:
            break
    if true_norm > target and total_iterations >= cap:
        raise ConvergenceError("film solve exhausted its iteration budget",
                               best=x, residual=true_norm, iterations=total_iterations)

    full = embedded.copy()
    full[1:-1, 1:-1] = x
    height = ScalarFieldOnGrid(grid, full)
    return FilmSolution(height, 0.0, true_norm, target, total_iterations)


def mean_value_residual(field: ScalarFieldOnGrid, center: tuple[int, int],
                        radius: float) -> tuple[float, float]:
    """(ball average minus center value, -(radius^2/8) * Laplacian at center).

    The two agree to O(radius^2) for smooth fields, which is the discrete
    mean-value property of harmonic functions when the Laplacian vanishes.
    """
    grid = field.grid
    if grid.dimension != 2:
        raise ValidationError("mean-value checks are for 2-D fields")
    ci, cj = center
    hx, hy = grid.spacing
    ri = int(np.floor(radius / hx))
    rj = int(np.floor(radius / hy))
    ni, nj = grid.shape
    if radius <= 0:
        raise ValidationError("radius must be positive")
    if ci - ri < 0 or ci + ri >= ni or cj - rj < 0 or cj + rj >= nj:
        raise ValidationError("ball does not fit inside the grid")
    if min(ri, rj) < 1:
        raise ValidationError("radius is below one grid spacing")

    ii, jj = np.meshgrid(np.arange(ci - ri, ci + ri + 1),
                         np.arange(cj - rj, cj + rj + 1), indexing="ij")
    inside = ((ii - ci) * hx) ** 2 + ((jj - cj) * hy) ** 2 <= radius * radius
    ball_avg = float(np.mean(field.values[ii[inside], jj[inside]]))

    v = field.values
    lap = ((2.0 * v[ci, cj] - v[ci - 1, cj] - v[ci + 1, cj]) / hx ** 2
           + (2.0 * v[ci, cj] - v[ci, cj - 1] - v[ci, cj + 1]) / hy ** 2)
    return ball_avg - float(v[ci, cj]), -(radius * radius / 8.0) * lap
