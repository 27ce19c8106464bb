"""Tests for the gradient, Lipschitz and penalty-oracle suites."""

import numpy as np
import pytest

from atloss.core.exceptions import OracleSizeError
from atloss.core.gradcheck import (
    check_at_loss_cells,
    check_at_loss_field,
    check_baselines,
    relative_error,
)
from atloss.core.lipschitz import sweep
from atloss.core.penalty_oracle import run_penalty_oracle


def test_relative_error_floor():
    assert relative_error(1.0, 1.0) == 0.0
    assert relative_error(2.0, 1.0) == pytest.approx(0.5)
    # both tiny: divided by the floor, not by themselves
    assert relative_error(1e-9, 2e-9) == pytest.approx(1e-6)


def test_at_loss_gradients():
    cases = check_at_loss_cells(cases=1000)
    assert len(cases) == 1000
    worst = max(c.max_rel_error for c in cases)
    assert worst < 1e-6


def test_at_loss_field_and_baseline_gradients():
    for case in check_at_loss_field(seed=2) + check_baselines(seed=2):
        assert case.passed, f"{case.suite} {case.name}: {case.max_rel_error:.3e}"


def test_lipschitz_sweep_default_taus():
    rows = sweep([1.0, 0.8, 0.6, 0.3, 0.05], grid_points=200_001)
    for row in rows:
        assert row.within_bound
        assert row.extremum_ok
        assert row.passed
    by_tau = {r.tau: r for r in rows}
    assert by_tau[1.0].analytic == pytest.approx(0.5926, abs=5e-5)
    assert by_tau[0.6].below_one
    assert not by_tau[0.05].below_one


def test_lipschitz_extremum_positions():
    (row,) = sweep([0.5], grid_points=100_001)
    assert row.zeta_dry == pytest.approx(2.0 / 3.0, abs=1e-3)
    assert row.zeta_wet == pytest.approx(1.0 / 3.0, abs=1e-3)


def test_oracle_small_instance():
    x = np.array([3.0, 0.5, 2.0, 1.0])
    report = run_penalty_oracle(4, x=x)
    assert report.passed
    assert report.min_penalty == 0
    assert report.argmin_unique
    assert report.assignments == 16


@pytest.mark.parametrize("seed", [0, 1])
def test_oracle_random_instance(seed):
    report = run_penalty_oracle(10, seed=seed)
    assert report.passed
    assert report.ranking_consistent
    assert report.max_limit_error <= 1e-9


def test_oracle_size_guard():
    with pytest.raises(OracleSizeError):
        run_penalty_oracle(21)
    with pytest.raises(OracleSizeError):
        run_penalty_oracle(0)
