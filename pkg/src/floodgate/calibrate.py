"""Flood-rate calibration against a target loss percentage.

Measured loss rises monotonically with the flood packet rate, so a simple
bisection between two byte-rate bounds (expressed as multiples of the
link capacity) homes in on the rate whose flood-interval loss for the
constant-bit-rate class matches the target.  Targets outside the losses
achievable at the bounds are refused.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import engine, queueing, traffic
from . import scenario as scenario_mod
from .errors import CalibrationError
from .scenario import ScenarioConfig

log = logging.getLogger(__name__)

# Flood byte-rate bounds as multiples of link capacity.  Below the low
# bound the queue is barely pushed past saturation and some loss is
# already unavoidable; the high bound turns away nearly everything.
DEFAULT_LO_FACTOR = 0.5
DEFAULT_HI_FACTOR = 60.0
CONVERGENCE_PP = 1.0   # stop once within this many percentage points
MAX_ITERATIONS = 24
# Single-run loss estimates carry a couple of percentage points of seed
# noise; each candidate rate is scored on this many consecutive seeds so
# the calibrated rate centres the across-seed distribution on the target.
AVERAGING_SEEDS = 3


def cbr_flood_loss_percent(sc: ScenarioConfig) -> float:
    """Aggregate CBR loss over every flood interval of one run."""
    trace = engine.run(sc)
    rows = [r for r in queueing.loss_by_class(trace)
            if r.traffic_class == "cbr" and r.flood_index > 0]
    arrivals = sum(r.arrivals for r in rows)
    drops = sum(r.drops for r in rows)
    return 100.0 * drops / arrivals if arrivals else 0.0


def _averaged_loss(sc: ScenarioConfig, rate_pps: float) -> float:
    probe = traffic.scale_flood_rate(sc, rate_pps)
    losses = [cbr_flood_loss_percent(scenario_mod.replace(probe, seed=sc.seed + j))
              for j in range(AVERAGING_SEEDS)]
    return sum(losses) / len(losses)


@dataclass(frozen=True, slots=True)
class CalibrationResult:
    scenario: ScenarioConfig
    flood_rate_pps: float
    achieved_loss_percent: float
    evaluations: int


def calibrate_flood_rate(sc: ScenarioConfig, target_percent: float,
                         lo_factor: float = DEFAULT_LO_FACTOR,
                         hi_factor: float = DEFAULT_HI_FACTOR,
                         ) -> CalibrationResult:
    """Bisect the flood packet rate until CBR flood loss hits the target.

    Raises CalibrationError when the target lies outside the losses
    reachable at the configured rate bounds, reporting both bracketing
    losses so the caller can see how far off the request was.
    """
    if not sc.attack.floods:
        raise CalibrationError("scenario has no flood sources to calibrate")
    if not 0 <= target_percent <= 100:
        raise CalibrationError(
            f"target loss must be between 0 and 100 percent, got {target_percent}")
    pkt = sc.attack.floods[0].packet_size
    lo = lo_factor * sc.link_capacity / pkt
    hi = hi_factor * sc.link_capacity / pkt

    lo_loss = _averaged_loss(sc, lo)
    hi_loss = _averaged_loss(sc, hi)
    evals = 2 * AVERAGING_SEEDS
    log.info("calibration bracket: %.3f%% at %.0f pps, %.3f%% at %.0f pps",
             lo_loss, lo, hi_loss, hi)
    if target_percent < lo_loss or target_percent > hi_loss:
        raise CalibrationError(
            f"target {target_percent}% is outside the achievable range "
            f"[{lo_loss:.3f}%, {hi_loss:.3f}%] at the configured rate bounds",
            lo_loss=lo_loss, hi_loss=hi_loss)

    best_rate, best_loss = lo, lo_loss
    if abs(hi_loss - target_percent) < abs(lo_loss - target_percent):
        best_rate, best_loss = hi, hi_loss
    for _ in range(MAX_ITERATIONS):
        if abs(best_loss - target_percent) <= CONVERGENCE_PP:
            break
        mid = (lo + hi) / 2.0
        mid_loss = _averaged_loss(sc, mid)
        evals += AVERAGING_SEEDS
        if abs(mid_loss - target_percent) < abs(best_loss - target_percent):
            best_rate, best_loss = mid, mid_loss
        if mid_loss < target_percent:
            lo = mid
        else:
            hi = mid
    calibrated = traffic.scale_flood_rate(sc, best_rate)
    return CalibrationResult(scenario=calibrated, flood_rate_pps=best_rate,
                             achieved_loss_percent=best_loss,
                             evaluations=evals)
