"""Tests for the gamma-matrix algebra checks."""

import numpy as np
import pytest

from leastbias.errors import ValidationError
from leastbias.spinor import (
    anticommutator_table,
    build_gamma,
    dirac_slash,
    minkowski_metric,
    slash_square_deviation,
)


def test_metric_is_mostly_minus():
    assert np.array_equal(minkowski_metric(), np.diag([1.0, -1.0, -1.0, -1.0]))


def test_gamma_stack_shape_and_entries():
    g = build_gamma()
    assert g.shape == (4, 4, 4)
    # every entry is 0, +-1, or +-i, so later products are exact
    assert np.all(np.isin(g.real, [-1.0, 0.0, 1.0]))
    assert np.all(np.isin(g.imag, [-1.0, 0.0, 1.0]))
    assert np.all((g.real == 0) | (g.imag == 0))


def test_clifford_relation_holds_exactly():
    table = anticommutator_table()
    assert table.shape == (4, 4)
    assert np.all(table == 0.0)


def test_anticommutator_table_detects_a_broken_stack():
    g = build_gamma()
    g[1] = g[0]
    table = anticommutator_table(g)
    assert table[1, 1] == 4.0  # {g0, g0} = 2I but eta^11 = -1
    assert table[0, 0] == 0.0


def test_gamma0_hermiticity_relations():
    g = build_gamma()
    g0 = g[0]
    for mu in range(4):
        # gamma^0 gamma^mu gamma^0 = gamma^mu-dagger, exactly
        assert np.array_equal(g0 @ g[mu] @ g0, g[mu].conj().T)


def test_slash_of_zero_vanishes():
    assert np.array_equal(dirac_slash(np.zeros(4)), np.zeros((4, 4)))


def test_slash_square_on_a_unit_timelike_vector():
    s = dirac_slash([1.0, 0.0, 0.0, 0.0])
    assert np.array_equal(s @ s, np.eye(4, dtype=complex))


def test_slash_square_matches_invariant_exactly():
    k = np.array([3.0, 1.0, 2.0, 0.0])
    s = dirac_slash(k)
    invariant = 9.0 - 1.0 - 4.0  # k . k with signature (+,-,-,-)
    assert np.array_equal(s @ s, invariant * np.eye(4, dtype=complex))
    assert slash_square_deviation(k) == 0.0


def test_slash_square_deviation_is_exactly_zero_on_dyadic_vectors():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = rng.integers(-64, 65, size=4) / 256.0
        assert slash_square_deviation(k) == 0.0


def test_slash_is_linear():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.integers(-8, 9, size=4).astype(float)
        b = rng.integers(-8, 9, size=4).astype(float)
        lhs = dirac_slash(a + b)
        rhs = dirac_slash(a) + dirac_slash(b)
        assert np.array_equal(lhs, rhs)


def test_shape_validation():
    with pytest.raises(ValidationError):
        dirac_slash([1.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        anticommutator_table(np.zeros((3, 4, 4)))
