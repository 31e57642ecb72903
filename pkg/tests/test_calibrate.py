"""Flood-rate calibration on a small, fast overload scenario."""

import pytest

from conftest import cbr_spec, det_scenario, mini_flood_scenario
from floodgate import calibrate, traffic
from floodgate.calibrate import (CalibrationResult, calibrate_flood_rate,
                                 cbr_flood_loss_percent)
from floodgate.errors import CalibrationError
from floodgate.scenario import replace


def test_loss_grows_with_flood_rate():
    sc = mini_flood_scenario()
    losses = []
    for rate in (30.0, 60.0, 120.0, 240.0, 480.0):
        probe = traffic.scale_flood_rate(sc, rate)
        losses.append(cbr_flood_loss_percent(probe))
    for lo, hi in zip(losses, losses[1:]):
        assert hi >= lo - 0.5  # monotone up to sampling noise
    assert losses[-1] > losses[0] + 20.0


def test_calibration_hits_a_feasible_target():
    sc = mini_flood_scenario()
    result = calibrate_flood_rate(sc, 40.0)
    assert isinstance(result, CalibrationResult)
    assert abs(result.achieved_loss_percent - 40.0) <= calibrate.CONVERGENCE_PP
    assert all(f.rate_pps == result.flood_rate_pps
               for f in result.scenario.attack.floods)
    assert result.scenario.sources == sc.sources
    assert result.evaluations >= 2 * calibrate.AVERAGING_SEEDS
    # the reported loss is reproducible from the reported rate
    measured = calibrate._averaged_loss(sc, result.flood_rate_pps)
    assert measured == pytest.approx(result.achieved_loss_percent)


def test_unreachable_target_reports_the_bracket():
    sc = mini_flood_scenario()
    with pytest.raises(CalibrationError) as exc:
        calibrate_flood_rate(sc, 99.99)
    assert exc.value.lo_loss is not None
    assert exc.value.hi_loss is not None
    assert exc.value.lo_loss < exc.value.hi_loss < 99.99


def test_scenario_without_floods_is_refused():
    sc = det_scenario([cbr_spec(10.0)])
    with pytest.raises(CalibrationError, match="no flood sources") as exc:
        calibrate_flood_rate(sc, 36.0)
    assert exc.value.lo_loss is None
    assert exc.value.hi_loss is None


def test_malformed_targets_are_refused():
    sc = mini_flood_scenario()
    for target in (-5.0, 150.0):
        with pytest.raises(CalibrationError, match="between 0 and 100"):
            calibrate_flood_rate(sc, target)


def test_flood_loss_of_calm_interval_is_zero():
    # the cbr flow ends before the flood interval begins
    sc = mini_flood_scenario()
    calm = replace(sc, sources=(cbr_spec(10.0, end=1.0),))
    assert cbr_flood_loss_percent(calm) == 0.0
