"""Closed-form self-checks and their ability to catch planted bugs."""

import pytest

from floodgate import validation
from floodgate.errors import UnstableSystemError
from floodgate.validation import (CheckResult, check_blocking, check_little,
                                  poisson_scenario)


def test_poisson_scenario_shape():
    sc = poisson_scenario(5.0, 10.0, 100.0, buffer_k=7, seed=3)
    assert sc.buffer_k == 7
    assert sc.service_rate_mu == 10.0
    assert len(sc.sources) == 1
    assert sc.sources[0].rate_pps == 5.0
    assert sc.attack.floods == ()


def test_unbounded_queue_requires_stability():
    with pytest.raises(UnstableSystemError):
        poisson_scenario(10.0, 10.0, 100.0, buffer_k=None, seed=1)
    # a finite buffer makes any load admissible
    sc = poisson_scenario(20.0, 10.0, 100.0, buffer_k=5, seed=1)
    assert sc.buffer_k == 5


def test_little_check_passes_on_shortened_run():
    little, means = check_little(seed=5, horizon_s=2000.0)
    assert little.passed, little.line()
    assert means.passed, means.line()
    assert little.details["residual_n"] <= 0.05
    assert means.details["n_expected"] == 1.0
    assert means.details["w_expected_s"] == pytest.approx(0.2)


def test_blocking_check_passes_on_shortened_run():
    res = check_blocking(seed=7, min_arrivals=200_000)
    assert res.passed, res.line()
    assert res.details["arrivals"] >= 200_000
    assert res.details["abs_err"] <= validation.BLOCKING_ABS_TOL
    assert res.details["rel_err"] <= validation.BLOCKING_REL_TOL


def test_blocking_check_catches_undersized_buffer():
    """Shrinking the effective buffer by two slots moves the blocking
    probability well past the relative gate even on a short run."""
    res = check_blocking(seed=7, min_arrivals=200_000, buffer_bias=-2)
    assert not res.passed
    assert res.details["rel_err"] > validation.BLOCKING_REL_TOL


def test_check_result_line_format():
    res = CheckResult(name="demo", passed=True,
                      details={"count": 3, "ratio": 0.25})
    assert res.line() == "[PASS] demo: count=3, ratio=0.25"
    res = CheckResult(name="demo", passed=False, details={})
    assert res.line().startswith("[FAIL] demo:")
