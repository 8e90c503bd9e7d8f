"""Least-biased states by direct minimization.

Two faces of one principle: discrete distributions that maximize entropy
under moment constraints, and normalized fields that minimize Laplacian
quadratic forms (ground states, soap films, harmonic cochains). Curvature
tooling (parametrized metrics, Cartan frames, gamma matrices) extends the
same bias-minimizing functionals to curved charts.
"""

from .errors import (ConvergenceError, InfeasibleConstraintError, ToolkitError,
                     ValidationError)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ToolkitError",
    "ValidationError",
    "InfeasibleConstraintError",
    "ConvergenceError",
]
