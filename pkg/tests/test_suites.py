"""Unit tests for check bookkeeping and suite assembly."""

from __future__ import annotations

import math
import time

import pytest

from dunkl_lab.base import IntegrationError, ParameterError
from dunkl_lab.config import ExperimentConfig
from dunkl_lab.suites import (
    CHECK_COLUMNS,
    SUITES,
    Check,
    SuiteReport,
    _guarded,
    calculus_suite,
    interpolation_suite,
    norms_suite,
    run_suite,
    run_tasks,
)


@pytest.mark.unit
def test_at_most() -> None:
    """Test the upper-bound check, including its boundary."""
    assert Check.at_most("residual", 1e-9, 1e-8).passed
    assert Check.at_most("residual", 1e-8, 1e-8).passed
    assert not Check.at_most("residual", 2e-8, 1e-8).passed


@pytest.mark.unit
def test_nan_fails() -> None:
    """Test a NaN measurement never passes."""
    assert not Check.at_most("residual", math.nan, 1.0).passed


@pytest.mark.unit
def test_within_band() -> None:
    """Test band checks keep both limits."""
    check = Check.within("ratio", 0.5, (0.1, 10.0))
    assert check.passed
    assert (check.lower, check.bound) == (0.1, 10.0)
    assert not Check.within("ratio", 20.0, (0.1, 10.0)).passed


@pytest.mark.unit
def test_errored_check() -> None:
    """Test a raised computation becomes a failed hard check naming the error."""
    check = Check.errored("mass", ParameterError("bad"), subject="k=1", parameter="t=0.1")
    assert not check.passed
    assert check.hard
    assert math.isnan(check.value)
    assert check.parameter == "t=0.1;ParameterError"


@pytest.mark.unit
def test_errored_check_keeps_soft_flag() -> None:
    """Test a raising soft task stays soft and leaves the suite passing."""

    def task() -> list[Check]:
        raise IntegrationError("missed", 0.0, 1.0)

    (check,) = _guarded("poisson_spectral_vs_quadrature", "k=0", task, hard=False)()
    assert not check.passed
    assert not check.hard
    report = SuiteReport("semigroup", [check])
    assert report.passed
    assert report.flags == [check]


@pytest.mark.unit
def test_record_columns() -> None:
    """Test records follow the report schema with integer flags."""
    record = Check.at_most("residual", 0.5, 1.0, hard=False, subject="diag").to_record("calculus")
    assert tuple(record) == CHECK_COLUMNS
    assert record["suite"] == "calculus"
    assert record["lower"] == ""
    assert (record["passed"], record["hard"]) == (1, 0)


@pytest.mark.unit
def test_residual_is_its_own_error_estimate() -> None:
    """Test residual checks report their residual as the error and reported quantities only a given one."""
    assert Check.at_most("contour_exp", 3e-11, 1e-7).error == 3e-11
    assert Check.at_most("multiplier_sup", 2.5, math.inf, hard=False).error is None
    assert Check.at_most("multiplier_sup", 2.5, math.inf, hard=False, error=1e-4).error == 1e-4
    assert Check.within("ratio", 0.5, (0.1, 10.0)).to_record("interpolation")["error"] == ""


@pytest.mark.unit
def test_soft_failures_are_flags() -> None:
    """Test only hard failures fail a suite."""
    report = SuiteReport(
        "norms",
        [
            Check.at_most("hard_ok", 0.0, 1.0),
            Check.at_most("soft_bad", 2.0, 1.0, hard=False),
        ],
    )
    assert report.passed
    assert report.failures == []
    assert [check.name for check in report.flags] == ["soft_bad"]

    report.checks.append(Check.at_most("hard_bad", 2.0, 1.0))
    assert not report.passed
    assert [check.name for check in report.failures] == ["hard_bad"]
    assert len(report.to_records()) == 3


@pytest.mark.unit
@pytest.mark.concurrent
def test_run_tasks_keeps_submission_order() -> None:
    """Test results are concatenated in task order whatever finishes first."""

    def task(index: int) -> list[Check]:
        time.sleep(0.01 * (5 - index))
        return [Check.at_most(f"task{index}", index, 10.0), Check.at_most(f"task{index}b", index, 10.0)]

    tasks = [lambda index=index: task(index) for index in range(5)]
    names = [check.name for check in run_tasks(tasks, threads=4)]
    assert names == [name for index in range(5) for name in (f"task{index}", f"task{index}b")]
    assert names == [check.name for check in run_tasks(tasks, threads=1)]


@pytest.mark.unit
def test_suite_registry() -> None:
    """Test the registered suite names."""
    assert set(SUITES) == {"kernels", "semigroup", "calculus", "interpolation", "norms"}


@pytest.mark.unit
def test_unknown_suite() -> None:
    """Test an unknown suite name raises ParameterError."""
    with pytest.raises(ParameterError, match="Unknown suite"):
        run_suite("everything", ExperimentConfig())


@pytest.mark.unit
def test_calculus_tasks_per_generator() -> None:
    """Test one Cauchy task plus matrix, contour, Bessel and three multiplier tasks per generator."""
    assert len(calculus_suite(ExperimentConfig(generators=["diag"]))) == 7
    assert len(calculus_suite(ExperimentConfig(generators=["diag", "jordan"]))) == 13


@pytest.mark.unit
def test_interpolation_tasks_per_generator() -> None:
    """Test one interpolation task per generator."""
    assert len(interpolation_suite(ExperimentConfig())) == 3


@pytest.mark.unit
def test_norms_suite_needs_betas() -> None:
    """Test an empty exponent list is rejected before any work."""
    with pytest.raises(ParameterError, match="beta"):
        norms_suite(ExperimentConfig(betas=[]))
