"""Uniform structured grids and the finite-difference Laplacian.

Sign convention: the Laplacian is positive semidefinite,
Delta = -sum_k d^2/dx_k^2, discretized with second-order central
differences. Dirichlet axes impose zero values outside the grid;
periodic axes wrap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ValidationError

MAX_DIMENSION = 3

__all__ = [
    "BoundaryKind",
    "UniformGrid",
    "ScalarFieldOnGrid",
    "fd_laplacian",
    "inner_product",
    "tensor_product_field",
    "field_to_csv",
]


class BoundaryKind(Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class UniformGrid:
    """Axis-aligned lattice: per-axis point count, spacing, boundary rule, origin."""

    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    boundary: tuple[BoundaryKind, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        d = len(self.shape)
        if not 1 <= d <= MAX_DIMENSION:
            raise ValidationError(f"grid dimension must be 1..{MAX_DIMENSION}, got {d}")
        if not (len(self.spacing) == len(self.boundary) == len(self.origin) == d):
            raise ValidationError("shape, spacing, boundary, origin must agree in length")
        if any(n < 3 for n in self.shape):
            raise ValidationError("each axis needs at least 3 points")
        if any(not (h > 0) for h in self.spacing):
            raise ValidationError("spacings must be positive")

    @classmethod
    def dirichlet_box(cls, bounds, counts) -> "UniformGrid":
        """Interior lattice of an open box; zero boundary lives one spacing outside.

        bounds: sequence of (lo, hi) per axis; counts: interior points per axis.
        """
        spacing = tuple((hi - lo) / (n + 1) for (lo, hi), n in zip(bounds, counts))
        origin = tuple(lo + h for (lo, _), h in zip(bounds, spacing))
        return cls(tuple(counts), spacing,
                   tuple(BoundaryKind.DIRICHLET for _ in counts), origin)

    @classmethod
    def periodic_box(cls, lengths, counts, origin=None) -> "UniformGrid":
        """Lattice on a flat torus with the given side lengths."""
        spacing = tuple(length / n for length, n in zip(lengths, counts))
        if origin is None:
            origin = tuple(0.0 for _ in counts)
        return cls(tuple(counts), spacing,
                   tuple(BoundaryKind.PERIODIC for _ in counts), tuple(origin))

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def meshgrid(self):
        return np.meshgrid(*[self.axis_coordinates(k) for k in range(self.dimension)],
                           indexing="ij")

    def sample(self, fn: Callable) -> "ScalarFieldOnGrid":
        """Evaluate fn on the lattice; fn receives one coordinate array per axis."""
        return ScalarFieldOnGrid(self, np.asarray(fn(*self.meshgrid()), dtype=float))


@dataclass(frozen=True)
class ScalarFieldOnGrid:
    """Real samples attached to every grid point."""

    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValidationError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def normalized(self) -> "ScalarFieldOnGrid":
        """Rescale so the grid inner product <f, f> equals one."""
        n2 = inner_product(self, self)
        if n2 <= 0:
            raise ValidationError("cannot normalize the zero field")
        return ScalarFieldOnGrid(self.grid, self.values / np.sqrt(n2))


def _second_difference(values: np.ndarray, axis: int, kind: BoundaryKind) -> np.ndarray:
    if kind is BoundaryKind.PERIODIC:
        return (np.roll(values, -1, axis=axis) - 2.0 * values
                + np.roll(values, 1, axis=axis))
    pad = [(0, 0)] * values.ndim
    pad[axis] = (1, 1)
    ext = np.pad(values, pad)  # zero extension
    lo = [slice(None)] * values.ndim
    hi = [slice(None)] * values.ndim
    lo[axis] = slice(0, -2)
    hi[axis] = slice(2, None)
    return ext[tuple(hi)] - 2.0 * values + ext[tuple(lo)]


def fd_laplacian(field: ScalarFieldOnGrid) -> ScalarFieldOnGrid:
    """Positive-semidefinite Laplacian: -(sum over axes of central second differences)."""
    g = field.grid
    out = np.zeros_like(field.values)
    for axis in range(g.dimension):
        out -= _second_difference(field.values, axis, g.boundary[axis]) / g.spacing[axis] ** 2
    return ScalarFieldOnGrid(g, out)


def inner_product(f: ScalarFieldOnGrid, g: ScalarFieldOnGrid) -> float:
    """Cell-volume weighted l2 pairing; both fields must share the grid."""
    if f.grid != g.grid:
        raise ValidationError("fields live on different grids")
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def tensor_product_field(f: ScalarFieldOnGrid, g: ScalarFieldOnGrid) -> ScalarFieldOnGrid:
    """(f x g)(p, q) = f(p) g(q) on the concatenated-axes grid."""
    gf, gg = f.grid, g.grid
    if gf.dimension + gg.dimension > MAX_DIMENSION:
        raise ValidationError("product grid would exceed the supported dimension")
    grid = UniformGrid(gf.shape + gg.shape, gf.spacing + gg.spacing,
                       gf.boundary + gg.boundary, gf.origin + gg.origin)
    return ScalarFieldOnGrid(grid, np.multiply.outer(f.values, g.values))


def field_to_csv(field: ScalarFieldOnGrid, path) -> None:
    """One row per point, row-major: coordinates then value."""
    g = field.grid
    coords = g.meshgrid()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k}" for k in range(g.dimension)] + ["value"])
        flat = [c.ravel() for c in coords] + [field.values.ravel()]
        for row in zip(*flat):
            writer.writerow([repr(float(x)) for x in row])
