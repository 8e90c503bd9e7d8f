"""Acceptance gate: one pass/fail check per promised numerical behaviour.

The full battery runs once at import and every criterion is asserted
individually, so `pytest -v tests/test_acceptance.py` prints one line per
criterion. A deliberately miscalibrated solver at the end checks that the
battery actually has teeth.
"""

import json

import numpy as np
import pytest

from leastbias import acceptance, schrodinger
from leastbias.grids import BoundaryKind
from leastbias.variational import SymmetricOperator

RECORDS = acceptance.run_battery()
BY_NAME = {record.name: record for record in RECORDS}


@pytest.mark.parametrize("name", acceptance.CRITERION_NAMES)
def test_criterion(name):
    record = BY_NAME[name]
    print(acceptance.summary_lines([record])[0])
    assert record.passed, f"{name} failed with metrics {record.metrics}"
    assert record.elapsed_seconds <= record.budget_seconds


def test_battery_covers_every_name_in_order():
    assert tuple(r.name for r in RECORDS) == acceptance.CRITERION_NAMES
    payload = acceptance.results_payload(RECORDS)
    assert [row["name"] for row in payload] == list(acceptance.CRITERION_NAMES)
    assert json.loads(acceptance.serialize_results(RECORDS)) == payload


def test_repeated_runs_serialize_identically():
    record = BY_NAME["determinism"]
    assert record.passed
    assert record.metrics["identical"] is True


def test_battery_finishes_inside_the_total_budget():
    assert sum(r.elapsed_seconds for r in RECORDS) < 360.0


def test_unknown_criterion_name_is_rejected():
    with pytest.raises(KeyError):
        acceptance.run_criterion("perpetual-motion")


def test_battery_detects_a_miscalibrated_kinetic_stencil(monkeypatch):
    # a 0.1% error in the off-diagonal coupling must not slip through
    def skewed(grid, vfield):
        assert grid.dimension == 1
        assert grid.boundary[0] is BoundaryKind.DIRICHLET
        h2 = grid.spacing[0] ** 2
        diag = 2.0 / h2 + vfield.values
        off = np.full(grid.shape[0] - 1, -(1.0 + 1e-3) / h2)
        return SymmetricOperator.from_tridiagonal(diag, off)

    monkeypatch.setattr(schrodinger, "_operator", skewed)
    record = acceptance.run_criterion("ground-states")
    assert not record.passed
