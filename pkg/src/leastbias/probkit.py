"""Discrete probability tools: entropy, products, constrained entropy maximization.

Entropy is measured in nats throughout, with the 0*log(0) = 0 convention.
The maximum-entropy solver returns the exponential-family solution
p_k = exp(-beta*E_k - logZ) for prescribed mean energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InfeasibleConstraintError, ValidationError

WEIGHT_TOL = 1e-12

__all__ = [
    "DiscreteDistribution",
    "EnergyLevels",
    "MaxEntSolution",
    "MixingMap",
    "MaxwellParameters",
    "entropy",
    "product_distribution",
    "solve_maxent",
    "apply_mixing",
    "birkhoff_mixing",
    "maxwell_density",
    "maxwell_marginal",
]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite probability vector: nonnegative weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("weights must be a nonempty 1-d array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class EnergyLevels:
    """Real energy ladder; levels need not be sorted but must be finite."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("levels must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValidationError("levels must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class MaxEntSolution:
    """Entropy-maximizing distribution for a mean-energy constraint.

    multipliers holds the Lagrange pair (mean-energy multiplier beta,
    normalization multiplier logZ - 1) of the stationarity conditions.
    """

    distribution: DiscreteDistribution
    beta: float
    log_normalizer: float
    multipliers: tuple[float, float] = field(default=(0.0, 0.0))


@dataclass(frozen=True)
class MixingMap:
    """Doubly stochastic matrix: rows and columns each sum to one."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("mixing matrix must be square")
        if np.any(m < -WEIGHT_TOL) or not np.all(np.isfinite(m)):
            raise ValidationError("mixing matrix entries must be finite and nonnegative")
        if (np.max(np.abs(m.sum(axis=0) - 1.0)) > WEIGHT_TOL
                or np.max(np.abs(m.sum(axis=1) - 1.0)) > WEIGHT_TOL):
            raise ValidationError("mixing matrix must have unit row and column sums")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MaxwellParameters:
    """Isotropic Gaussian velocity law C*exp(-alpha*|v|^2) in three dimensions.

    The normalizer is fixed by unit total probability: C = (alpha/pi)^(3/2).
    """

    alpha: float
    normalization: float = field(init=False)

    def __post_init__(self):
        if not (self.alpha > 0) or not np.isfinite(self.alpha):
            raise ValidationError("alpha must be a positive real")
        object.__setattr__(self, "normalization", (self.alpha / np.pi) ** 1.5)


def entropy(dist: DiscreteDistribution) -> float:
    """-sum p_k log p_k in nats, with 0 log 0 = 0."""
    w = dist.weights
    nz = w[w > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def product_distribution(p: DiscreteDistribution, q: DiscreteDistribution) -> DiscreteDistribution:
    """Joint law of independent draws, flattened row-major (p-index outer)."""
    return DiscreteDistribution(np.outer(p.weights, q.weights).ravel())


def _mean_energy(levels: np.ndarray, beta: float) -> tuple[float, float]:
    """Mean energy and logZ of the Boltzmann weights at inverse temperature beta."""
    a = -beta * levels
    shift = a.max()
    w = np.exp(a - shift)
    z = w.sum()
    mean = float(np.dot(w, levels) / z)
    return mean, float(np.log(z) + shift)


def solve_maxent(levels: EnergyLevels, target_mean: float,
                 tol: float = 1e-13, max_iter: int = 400) -> MaxEntSolution:
    """Maximize entropy subject to sum p_k = 1 and sum p_k E_k = target_mean.

    The stationary family is p_k = exp(-beta*E_k - logZ); beta is located by
    bisection on the monotone map beta -> mean energy, with geometric bracket
    expansion to straddle the target first.
    """
    e = levels.values
    lo, hi = float(e.min()), float(e.max())
    if not np.isfinite(target_mean):
        raise ValidationError("target mean must be finite")
    if target_mean < lo or target_mean > hi:
        raise InfeasibleConstraintError(
            f"target mean {target_mean} outside level range [{lo}, {hi}]")
    if hi == lo or target_mean == lo or target_mean == hi:
        # degenerate targets sit at an endpoint of the feasible interval;
        # only the all-mass-on-extreme law attains them, which is the
        # beta -> +/- inf limit, so reject unless all levels coincide
        if hi == lo:
            n = e.size
            w = np.full(n, 1.0 / n)
            return MaxEntSolution(DiscreteDistribution(w), 0.0, float(np.log(n)),
                                  (0.0, float(np.log(n)) - 1.0))
        raise InfeasibleConstraintError(
            "target mean on the boundary of the level range has no finite-beta solution")

    scale = max(1.0, abs(lo), abs(hi))
    # mean(beta) is decreasing: mean(-inf) = max E, mean(+inf) = min E
    b_lo, b_hi = -1.0, 1.0
    for _ in range(200):
        if _mean_energy(e, b_lo)[0] > target_mean:
            break
        b_lo *= 2.0
    for _ in range(200):
        if _mean_energy(e, b_hi)[0] < target_mean:
            break
        b_hi *= 2.0

    beta = 0.0
    for _ in range(max_iter):
        beta = 0.5 * (b_lo + b_hi)
        mean, _ = _mean_energy(e, beta)
        if mean > target_mean:
            b_lo = beta
        else:
            b_hi = beta
        if b_hi - b_lo <= 1e-16 * max(1.0, abs(beta)):
            break

    mean, logz = _mean_energy(e, beta)
    if abs(mean - target_mean) > max(tol, 1e-10) * scale:
        raise ConvergenceError("bisection failed to match the target mean",
                               best=beta, residual=abs(mean - target_mean))
    weights = np.exp(-beta * e - logz)
    weights = weights / weights.sum()  # remove last-digit drift before validation
    return MaxEntSolution(DiscreteDistribution(weights), float(beta), logz,
                          (float(beta), logz - 1.0))


def apply_mixing(dist: DiscreteDistribution, mixing: MixingMap) -> DiscreteDistribution:
    """Push a distribution through a doubly stochastic map; entropy cannot drop."""
    if mixing.matrix.shape[0] != dist.size:
        raise ValidationError("mixing map dimension does not match distribution")
    out = mixing.matrix @ dist.weights
    out = np.clip(out, 0.0, None)
    return DiscreteDistribution(out / out.sum())


def birkhoff_mixing(n: int, rng: np.random.Generator, terms: int = 4) -> MixingMap:
    """Random doubly stochastic matrix as a convex mix of permutation matrices."""
    if n < 1 or terms < 1:
        raise ValidationError("n and terms must be positive")
    coeffs = rng.dirichlet(np.ones(terms))
    m = np.zeros((n, n))
    for c in coeffs:
        m[np.arange(n), rng.permutation(n)] += c
    return MixingMap(m)


def maxwell_density(params: MaxwellParameters, v) -> np.ndarray:
    """C*exp(-alpha*|v|^2) at velocity rows v (shape (..., 3))."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValidationError("velocities must have three components")
    r2 = np.sum(v * v, axis=-1)
    return params.normalization * np.exp(-params.alpha * r2)


def maxwell_marginal(params: MaxwellParameters, component) -> np.ndarray:
    """Single-component marginal sqrt(alpha/pi)*exp(-alpha*u^2)."""
    u = np.asarray(component, dtype=float)
    return np.sqrt(params.alpha / np.pi) * np.exp(-params.alpha * u * u)
