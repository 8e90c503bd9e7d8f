"""Finite-difference ground states of Delta + V and Gaussian collapse scans.

Energies use the convention where the kinetic operator is the positive
Laplacian of the grids module, so a particle in a unit box has ground energy
pi^2 and the radial hydrogen operator -d^2/dr^2 - 2/r (Rydberg units) has
ground energy -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grids import (BoundaryKind, ScalarFieldOnGrid, UniformGrid, fd_laplacian,
                    inner_product, tensor_product_field)
from .variational import SolverConfig, SymmetricOperator, minimize_quadratic_form

STATE_NORM_TOL = 1e-10
POTENTIAL_KINDS = ("zero", "harmonic", "coulomb_radial", "tabulated")

__all__ = [
    "Potential",
    "QuantumState",
    "GroundStateResult",
    "CollapseScan",
    "ground_state",
    "kinetic_energy",
    "kinetic_additivity_check",
    "collapse_scan",
]


@dataclass(frozen=True)
class Potential:
    """Potential energy term, either analytic by kind or tabulated on a grid.

    kinds: zero; harmonic (strength*|x|^2); coulomb_radial (-strength/r on a
    1-D radial grid); tabulated (explicit samples).
    """

    kind: str
    strength: float = 1.0
    samples: ScalarFieldOnGrid | None = None

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValidationError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated" and self.samples is None:
            raise ValidationError("tabulated potential needs samples")

    def evaluate(self, grid: UniformGrid) -> ScalarFieldOnGrid:
        if self.kind == "zero":
            values = np.zeros(grid.shape)
        elif self.kind == "harmonic":
            values = self.strength * sum(c * c for c in grid.meshgrid())
        elif self.kind == "coulomb_radial":
            if grid.dimension != 1:
                raise ValidationError("coulomb_radial expects a 1-D radial grid")
            r = grid.axis_coordinates(0)
            if np.any(r <= 0):
                raise ValidationError("radial grid must have strictly positive coordinates")
            values = -self.strength / r
        else:
            if self.samples.grid != grid:
                raise ValidationError("tabulated samples live on a different grid")
            values = self.samples.values
        if not np.all(np.isfinite(values)):
            raise ValidationError("potential is unbounded on the grid")
        return ScalarFieldOnGrid(grid, np.asarray(values, dtype=float))


@dataclass(frozen=True)
class QuantumState:
    """Unit-norm real field: <gamma, gamma> = 1 in the grid inner product."""

    field: ScalarFieldOnGrid

    def __post_init__(self):
        n2 = inner_product(self.field, self.field)
        if abs(n2 - 1.0) > STATE_NORM_TOL:
            raise ValidationError(f"state norm^2 is {n2!r}, not 1")

    @property
    def grid(self) -> UniformGrid:
        return self.field.grid


@dataclass(frozen=True)
class GroundStateResult:
    state: QuantumState
    energy: float
    kinetic: float
    potential: float
    multipliers: tuple[float, float]
    residual: float
    iterations: int


def _operator(grid: UniformGrid, vfield: ScalarFieldOnGrid) -> SymmetricOperator:
    v = vfield.values
    if grid.dimension == 1 and grid.boundary[0] is BoundaryKind.DIRICHLET:
        h2 = grid.spacing[0] ** 2
        diag = 2.0 / h2 + v
        off = np.full(grid.shape[0] - 1, -1.0 / h2)
        return SymmetricOperator.from_tridiagonal(diag, off)

    def apply(x: np.ndarray) -> np.ndarray:
        f = ScalarFieldOnGrid(grid, x.reshape(grid.shape))
        return (fd_laplacian(f).values + v * f.values).ravel()

    return SymmetricOperator(int(np.prod(grid.shape)), apply)


def ground_state(grid: UniformGrid, potential: Potential,
                 config: SolverConfig = SolverConfig()) -> GroundStateResult:
    """Lowest state of Delta + V on the grid via the quadratic-form minimizer."""
    vfield = potential.evaluate(grid)
    op = _operator(grid, vfield)
    if op.bands is None and config.shift is None:
        # Delta is positive semidefinite, so min(V) - 1 sits below the spectrum
        config = SolverConfig(seed=config.seed, tol=config.tol,
                              max_iterations=config.max_iterations,
                              shift=float(vfield.values.min()) - 1.0,
                              symmetry_probes=config.symmetry_probes)
    result = minimize_quadratic_form(op, config)

    gamma = ScalarFieldOnGrid(grid, result.minimizer.reshape(grid.shape)
                              / np.sqrt(grid.cell_volume))
    state = QuantumState(gamma)
    kinetic = inner_product(gamma, fd_laplacian(gamma))
    pot = float(np.sum(vfield.values * gamma.values ** 2) * grid.cell_volume)
    return GroundStateResult(state, result.value, kinetic, pot,
                             result.multipliers, result.residual, result.iterations)


def kinetic_energy(state: QuantumState) -> float:
    """<gamma, Delta gamma>; the correlation measure of a normalized state."""
    return inner_product(state.field, fd_laplacian(state.field))


def kinetic_additivity_check(a: QuantumState, b: QuantumState) -> tuple[float, float, float]:
    """(product kinetic, summed kinetics, |difference|) on the product grid.

    The residual is zero in exact arithmetic because the product-grid
    Laplacian splits into per-factor terms.
    """
    product = tensor_product_field(a.field, b.field)
    lhs = inner_product(product, fd_laplacian(product))
    rhs = kinetic_energy(a) + kinetic_energy(b)
    return lhs, rhs, abs(lhs - rhs)


@dataclass(frozen=True)
class CollapseScan:
    """Energy decomposition of Gaussian trial states against their width."""

    sigmas: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    total: np.ndarray

    def minimum(self) -> tuple[float, float]:
        """(sigma, total) at the scanned minimum of the total energy."""
        k = int(np.argmin(self.total))
        return float(self.sigmas[k]), float(self.total[k])


def collapse_scan(sigmas, charge: float = 2.0, quadrature_points: int = 4001) -> CollapseScan:
    """Scan normalized 3-D Gaussian trials gamma(r) ~ exp(-r^2 / (2 sigma^2))
    in the Coulomb potential -charge/r, by radial quadrature.

    kinetic = 4 pi int |gamma'|^2 r^2 dr, potential = -4 pi charge int gamma^2 r dr.
    """
    sig = np.asarray(sigmas, dtype=float)
    if sig.ndim != 1 or sig.size == 0:
        raise ValidationError("sigma scan must be a nonempty 1-d array")
    if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
        raise ValidationError("widths must be positive and finite")
    kin = np.empty(sig.size)
    pot = np.empty(sig.size)
    for k, s in enumerate(sig):
        r = np.linspace(0.0, 12.0 * s, quadrature_points)
        g2 = (np.pi * s * s) ** -1.5 * np.exp(-(r / s) ** 2)
        norm = 4.0 * np.pi * np.trapezoid(g2 * r * r, r)
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError("trial-state quadrature failed to normalize")
        kin[k] = 4.0 * np.pi * np.trapezoid(g2 * r ** 4, r) / s ** 4
        pot[k] = -4.0 * np.pi * charge * np.trapezoid(g2 * r, r)
    return CollapseScan(sig, kin, pot, kin + pot)
