"""Discrete exterior calculus on flat periodic structured meshes (1-D and 2-D).

Cochains carry one coefficient per oriented cell. The exterior derivative is
the signed incidence map (so d(d(c)) = 0 combinatorially), the Hodge star is
the diagonal dual-to-primal measure ratio, and the codifferential is the
inner-product adjoint of d. On these flat meshes the star is diagonal, so
star d star collapses to exactly that adjoint (up to the usual degree sign),
and <<d a, b>> = <<a, delta b>> holds to machine precision.

The deRham Laplacian d delta + delta d on 0-cochains reproduces the
finite-difference Laplacian of the grids module row for row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

__all__ = [
    "PeriodicMesh",
    "Cochain",
    "exterior_derivative",
    "hodge_star",
    "codifferential",
    "derham_laplacian",
    "cochain_inner",
]


def _incidence_1d(n: int) -> sp.csr_matrix:
    rows = np.repeat(np.arange(n), 2)
    cols = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1).ravel()
    vals = np.tile([-1.0, 1.0], n)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _incidence_2d(nx: int, ny: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    nv = nx * ny
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    vid = (i * ny + j).ravel()
    vxp = (((i + 1) % nx) * ny + j).ravel()
    vyp = (i * ny + (j + 1) % ny).ravel()

    # edge rows: x-edge block [0, nv), then y-edge block [nv, 2 nv)
    rows = np.concatenate([np.repeat(np.arange(nv), 2),
                           np.repeat(nv + np.arange(nv), 2)])
    cols = np.concatenate([np.stack([vid, vxp], axis=1).ravel(),
                           np.stack([vid, vyp], axis=1).ravel()])
    vals = np.tile([-1.0, 1.0], 2 * nv)
    d0 = sp.csr_matrix((vals, (rows, cols)), shape=(2 * nv, nv))

    # face (i,j) boundary, counterclockwise: +x(i,j) +y(i+1,j) -x(i,j+1) -y(i,j)
    ex = vid
    ex_up = (i * ny + (j + 1) % ny).ravel()
    ey = nv + vid
    ey_right = nv + (((i + 1) % nx) * ny + j).ravel()
    rows = np.repeat(np.arange(nv), 4)
    cols = np.stack([ex, ey_right, ex_up, ey], axis=1).ravel()
    vals = np.tile([1.0, 1.0, -1.0, -1.0], nv)
    d1 = sp.csr_matrix((vals, (rows, cols)), shape=(nv, 2 * nv))
    return d0, d1


@dataclass(frozen=True)
class PeriodicMesh:
    """Structured torus mesh with oriented incidence tables."""

    cells_per_axis: tuple[int, ...]
    lengths: tuple[float, ...]
    incidence: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = len(self.cells_per_axis)
        if d not in (1, 2):
            raise ValidationError("mesh dimension must be 1 or 2")
        if len(self.lengths) != d:
            raise ValidationError("lengths must match cells_per_axis")
        if any(n < 3 for n in self.cells_per_axis):
            raise ValidationError("need at least 3 cells per axis")
        if any(not (length > 0) for length in self.lengths):
            raise ValidationError("lengths must be positive")
        if d == 1:
            tables = (_incidence_1d(self.cells_per_axis[0]),)
        else:
            tables = _incidence_2d(*self.cells_per_axis)
            closure = tables[1] @ tables[0]
            if closure.nnz and np.max(np.abs(closure.data)) != 0:
                raise ValidationError("incidence tables are not closed")
        object.__setattr__(self, "incidence", tables)

    @property
    def dimension(self) -> int:
        return len(self.cells_per_axis)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.cells_per_axis))

    def cell_count(self, degree: int) -> int:
        nv = int(np.prod(self.cells_per_axis))
        if self.dimension == 1:
            return nv  # vertices and edges both
        return 2 * nv if degree == 1 else nv

    def vertex_coordinates(self) -> np.ndarray:
        """(N, dim) array of vertex positions, row-major over axes."""
        axes = [np.arange(n) * h for n, h in zip(self.cells_per_axis, self.spacing)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def to_json(self) -> str:
        return json.dumps({"dimension": self.dimension,
                           "cells_per_axis": list(self.cells_per_axis),
                           "lengths": list(self.lengths)})

    @classmethod
    def from_json(cls, text: str) -> "PeriodicMesh":
        doc = json.loads(text)
        for key in doc:
            if key not in ("dimension", "cells_per_axis", "lengths"):
                raise ValidationError(f"unknown mesh key {key!r}")
        mesh = cls(tuple(doc["cells_per_axis"]), tuple(float(x) for x in doc["lengths"]))
        if "dimension" in doc and doc["dimension"] != mesh.dimension:
            raise ValidationError("declared dimension does not match cells_per_axis")
        return mesh


@dataclass(frozen=True)
class Cochain:
    """Coefficients on the oriented k-cells of a mesh (primal or dual side)."""

    mesh: PeriodicMesh
    degree: int
    coefficients: np.ndarray
    dual: bool = False

    def __post_init__(self):
        if not 0 <= self.degree <= self.mesh.dimension:
            raise ValidationError(f"degree {self.degree} out of range")
        c = np.asarray(self.coefficients, dtype=float)
        expected = self.mesh.cell_count(self.degree)
        if c.shape != (expected,):
            raise ValidationError(
                f"expected {expected} coefficients for degree {self.degree}, got {c.shape}")
        object.__setattr__(self, "coefficients", c)


def _weights(mesh: PeriodicMesh, degree: int) -> np.ndarray:
    """Diagonal inner-product weights: dual-cell measure over primal-cell measure."""
    h = mesh.spacing
    nv = int(np.prod(mesh.cells_per_axis))
    if mesh.dimension == 1:
        return np.full(nv, h[0] if degree == 0 else 1.0 / h[0])
    hx, hy = h
    if degree == 0:
        return np.full(nv, hx * hy)
    if degree == 2:
        return np.full(nv, 1.0 / (hx * hy))
    return np.concatenate([np.full(nv, hy / hx), np.full(nv, hx / hy)])


def cochain_inner(a: Cochain, b: Cochain) -> float:
    """<<a, b>> with the diagonal (lumped) metric of the flat mesh."""
    if a.mesh != b.mesh or a.degree != b.degree or a.dual != b.dual:
        raise ValidationError("cochains are not comparable")
    w = _weights(a.mesh, a.degree)
    return float(np.sum(a.coefficients * w * b.coefficients))


def exterior_derivative(c: Cochain) -> Cochain:
    """Signed incidence coboundary; defined on primal cochains below top degree."""
    if c.dual:
        raise ValidationError("exterior derivative is provided on primal cochains only")
    if c.degree >= c.mesh.dimension:
        raise ValidationError("no exterior derivative above the top degree")
    mat = c.mesh.incidence[c.degree]
    return Cochain(c.mesh, c.degree + 1, mat @ c.coefficients)


def hodge_star(c: Cochain) -> Cochain:
    """Diagonal Hodge star onto the half-shifted dual mesh.

    Applying it twice gives (-1)^(k(n-k)) times the identity; in particular
    it is minus the identity on 1-cochains of a 2-D mesh.
    """
    mesh = c.mesh
    h = mesh.spacing
    if mesh.dimension == 1:
        out = c.coefficients * h[0] if c.degree == 0 else c.coefficients / h[0]
    else:
        hx, hy = h
        if c.degree == 0:
            out = c.coefficients * (hx * hy)
        elif c.degree == 2:
            out = c.coefficients / (hx * hy)
        else:
            nv = c.coefficients.size // 2
            u, v = c.coefficients[:nv], c.coefficients[nv:]
            # continuum rule star(a dx + b dy) = -b dx + a dy with edge measures
            out = np.concatenate([-v * (hx / hy), u * (hy / hx)])
    return Cochain(mesh, mesh.dimension - c.degree, out, dual=not c.dual)


def codifferential(c: Cochain) -> Cochain:
    """Adjoint of d: <<d a, b>> = <<a, codifferential(b)>> for all a.

    Computed as M_(k-1)^(-1) d^T M_k, which is what star d star reduces to
    here because every star is diagonal.
    """
    if c.dual:
        raise ValidationError("codifferential is provided on primal cochains only")
    if c.degree == 0:
        raise ValidationError("no codifferential below degree 1")
    mat = c.mesh.incidence[c.degree - 1]
    out = (mat.T @ (_weights(c.mesh, c.degree) * c.coefficients))
    out /= _weights(c.mesh, c.degree - 1)
    return Cochain(c.mesh, c.degree - 1, out)


def derham_laplacian(c: Cochain) -> Cochain:
    """d delta + delta d, dropping whichever half is undefined at the ends."""
    if c.dual:
        raise ValidationError("Laplacian is provided on primal cochains only")
    n = c.mesh.dimension
    parts = []
    if c.degree < n:
        parts.append(codifferential(exterior_derivative(c)).coefficients)
    if c.degree > 0:
        parts.append(exterior_derivative(codifferential(c)).coefficients)
    return Cochain(c.mesh, c.degree, sum(parts))
