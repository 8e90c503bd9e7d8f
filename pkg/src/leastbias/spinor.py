"""Gamma-matrix algebra checks in the Dirac representation.

Signature convention (+, -, -, -). The matrices have entries in
{0, +-1, +-i}, so the Clifford relation {gamma^mu, gamma^nu} =
2 eta^munu I and the contraction identity slash(k)^2 = (k . k) I hold
exactly in floating point for small integer four-vectors.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

__all__ = [
    "minkowski_metric",
    "build_gamma",
    "anticommutator_table",
    "dirac_slash",
    "slash_square_deviation",
]


def minkowski_metric() -> np.ndarray:
    return np.diag([1.0, -1.0, -1.0, -1.0])


def build_gamma() -> np.ndarray:
    """Stack of gamma^0..gamma^3, shape (4, 4, 4), Dirac representation."""
    sigma = np.array([
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ], dtype=complex)
    eye2 = np.eye(2, dtype=complex)
    zero2 = np.zeros((2, 2), dtype=complex)
    gammas = np.empty((4, 4, 4), dtype=complex)
    gammas[0] = np.block([[eye2, zero2], [zero2, -eye2]])
    for k in range(3):
        gammas[k + 1] = np.block([[zero2, sigma[k]], [-sigma[k], zero2]])
    return gammas


def anticommutator_table(gammas: np.ndarray | None = None) -> np.ndarray:
    """Max deviation of {gamma^mu, gamma^nu} from 2 eta^munu I, per pair."""
    g = build_gamma() if gammas is None else np.asarray(gammas, dtype=complex)
    if g.shape != (4, 4, 4):
        raise ValidationError("expected a stack of four 4x4 matrices")
    eta = minkowski_metric()
    eye = np.eye(4, dtype=complex)
    table = np.empty((4, 4))
    for mu in range(4):
        for nu in range(4):
            anti = g[mu] @ g[nu] + g[nu] @ g[mu]
            table[mu, nu] = np.max(np.abs(anti - 2.0 * eta[mu, nu] * eye))
    return table


def dirac_slash(k, gammas: np.ndarray | None = None) -> np.ndarray:
    """Contraction k_mu gamma^mu for a four-vector with upper indices."""
    k = np.asarray(k, dtype=float)
    if k.shape != (4,):
        raise ValidationError("expected a four-vector")
    g = build_gamma() if gammas is None else np.asarray(gammas, dtype=complex)
    lowered = minkowski_metric() @ k
    return np.einsum("m,mab->ab", lowered, g)


def slash_square_deviation(k, gammas: np.ndarray | None = None) -> float:
    """Max entry of |slash(k)^2 - (k . k) I|; exactly zero in this basis."""
    k = np.asarray(k, dtype=float)
    s = dirac_slash(k, gammas)
    square = float(k @ minkowski_metric() @ k)
    return float(np.max(np.abs(s @ s - square * np.eye(4))))
