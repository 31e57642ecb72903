"""Alarm logic: smoothing, threshold clauses, streaks and scoring."""

import random

import pytest

from floodgate.detector import (AlarmSignal, Detector, EwmaState,
                                FiredCondition, alarm_runs,
                                classification_report, ewma_update,
                                rule_conditions, signal_series, truth_labels)
from floodgate.metrics import MetricsWindow
from floodgate.scenario import AttackSchedule, DetectorConfig
from conftest import flood_spec


def mkwin(start=0.0, arrivals=0, drops=0, util=0.0, max_buf=0, departures=0):
    return MetricsWindow(window_start_s=start, window_end_s=start + 1.0,
                         p_arrivals=arrivals, p_departures=departures,
                         p_drops=drops, bytes_transmitted=0.0,
                         bandwidth_utilization=util, flow_count=1,
                         avg_packet_size=512.0, max_buffer_occupancy=max_buf,
                         mean_queue_length=0.0, mean_wait_s=0.0)


ATTACK = dict(arrivals=5000, drops=4900, util=1.0, max_buf=50)
CALM = dict(arrivals=10, drops=0, util=0.1, max_buf=2)


# -- smoothing --------------------------------------------------------------

def test_ewma_hand_stepped_sequence():
    """alpha=0.5 keeps the arithmetic exact in binary floats."""
    state, hit = ewma_update(None, 10.0, alpha=0.5, k=2.0, floor=0.1)
    assert state == EwmaState(mean=10.0, dev=0.0)
    assert hit is False  # first sample only primes

    state, hit = ewma_update(state, 12.0, alpha=0.5, k=2.0, floor=0.1)
    assert state == EwmaState(mean=11.0, dev=1.0)
    assert hit is True   # shift 2 > 2 * floor

    state, hit = ewma_update(state, 11.0, alpha=0.5, k=2.0, floor=0.1)
    assert state == EwmaState(mean=11.0, dev=0.5)
    assert hit is False

    state, hit = ewma_update(state, 14.0, alpha=0.5, k=2.0, floor=0.1)
    assert state == EwmaState(mean=12.5, dev=1.75)
    assert hit is True   # shift 3 > 2 * 0.5


def test_ewma_silent_on_constant_input():
    state = None
    for _ in range(50):
        state, hit = ewma_update(state, 3.7, alpha=0.3, k=3.0, floor=1e-6)
        assert hit is False
    assert state.mean == pytest.approx(3.7)
    assert state.dev == 0.0


def test_ewma_floor_suppresses_noise_at_zero_dev():
    state, _ = ewma_update(None, 100.0, alpha=0.3, k=3.0, floor=1.0)
    # shift 2 <= k * floor: not abrupt despite dev being exactly 0
    _, hit = ewma_update(state, 102.0, alpha=0.3, k=3.0, floor=1.0)
    assert hit is False
    _, hit = ewma_update(state, 104.0, alpha=0.3, k=3.0, floor=1.0)
    assert hit is True


# -- threshold clauses ------------------------------------------------------

def test_rule_conditions_fire_at_their_thresholds():
    cfg = DetectorConfig()
    fired = rule_conditions(mkwin(util=0.85), cfg, capacity_k=50)
    assert FiredCondition.HIGH_UTILIZATION in fired
    fired = rule_conditions(mkwin(util=0.849), cfg, capacity_k=50)
    assert FiredCondition.HIGH_UTILIZATION not in fired

    fired = rule_conditions(mkwin(arrivals=100, drops=90), cfg, 50)
    assert FiredCondition.DROPS_EQUAL_ARRIVALS in fired
    fired = rule_conditions(mkwin(arrivals=100, drops=89), cfg, 50)
    assert FiredCondition.DROPS_EQUAL_ARRIVALS not in fired
    # an idle window never counts as all-dropped
    fired = rule_conditions(mkwin(arrivals=0, drops=0), cfg, 50)
    assert FiredCondition.DROPS_EQUAL_ARRIVALS not in fired

    fired = rule_conditions(mkwin(max_buf=50), cfg, 50)
    assert FiredCondition.BUFFER_OVERFLOW in fired
    fired = rule_conditions(mkwin(max_buf=49), cfg, 50)
    assert FiredCondition.BUFFER_OVERFLOW not in fired
    fired = rule_conditions(mkwin(max_buf=50), cfg, capacity_k=None)
    assert FiredCondition.BUFFER_OVERFLOW not in fired


def test_rule_conditions_monotone_in_thresholds():
    """Raising a threshold can only remove fired conditions."""
    rng = random.Random(42)
    for _ in range(200):
        w = mkwin(arrivals=rng.randrange(0, 200),
                  drops=rng.randrange(0, 200),
                  util=rng.random(), max_buf=rng.randrange(0, 51))
        loose = DetectorConfig(util_threshold=0.6,
                               drop_arrival_ratio_threshold=0.5)
        tight = DetectorConfig(util_threshold=0.9,
                               drop_arrival_ratio_threshold=0.95)
        assert rule_conditions(w, tight, 50) <= rule_conditions(w, loose, 50)


# -- stateful decisions -----------------------------------------------------

def test_streak_requirement_and_hysteresis():
    cfg = DetectorConfig(consecutive_windows=2)
    seq = [mkwin(float(i), **(ATTACK if flag else CALM))
           for i, flag in enumerate([1, 1, 1, 0, 1, 1])]
    values = [sig.value for sig in signal_series(seq, cfg, capacity_k=50)]
    # two windows to raise, one failing window to clear
    assert values == [0, 1, 1, 0, 0, 1]


def test_alarm_follows_attack_with_default_config():
    cfg = DetectorConfig()
    seq = [mkwin(float(i), **(ATTACK if 3 <= i < 6 else CALM))
           for i in range(9)]
    signals = signal_series(seq, cfg, capacity_k=50)
    assert [s.value for s in signals] == [0, 0, 0, 1, 1, 1, 0, 0, 0]
    assert FiredCondition.ABRUPT_CHANGE in signals[3].fired_conditions
    assert signals[3].fired_conditions >= {FiredCondition.HIGH_UTILIZATION,
                                           FiredCondition.DROPS_EQUAL_ARRIVALS,
                                           FiredCondition.BUFFER_OVERFLOW}


def test_required_abrupt_change_pulses_at_onset():
    # once the smoothed state adapts to the attack level the abrupt-change
    # clause stops firing, so requiring it yields a single onset pulse
    cfg = DetectorConfig(require_abrupt_change=True)
    seq = [mkwin(float(i), **(ATTACK if i >= 3 else CALM)) for i in range(6)]
    signals = signal_series(seq, cfg, capacity_k=50)
    assert [s.value for s in signals] == [0, 0, 0, 1, 0, 0]


def test_detector_equivalent_to_manual_fold():
    cfg = DetectorConfig()
    seq = [mkwin(float(i), **(ATTACK if i % 3 == 0 else CALM))
           for i in range(7)]
    det = Detector(cfg, capacity_k=50)
    assert [det.decide(w) for w in seq] == signal_series(seq, cfg, 50)


# -- ground truth and scoring -----------------------------------------------

def _windows(n):
    return [mkwin(float(i)) for i in range(n)]


def test_truth_labels_overlap_semantics():
    attack = AttackSchedule(floods=(flood_spec(1.0, start=1.0, end=2.0),))
    assert truth_labels(_windows(3), attack) == [0, 1, 0]
    attack = AttackSchedule(floods=(flood_spec(1.0, start=0.5, end=1.5),))
    assert truth_labels(_windows(3), attack) == [1, 1, 0]
    # touching at the boundary is not overlap
    attack = AttackSchedule(floods=(flood_spec(1.0, start=2.0, end=3.0),))
    assert truth_labels(_windows(2), attack) == [0, 0]
    assert truth_labels(_windows(2), AttackSchedule()) == [0, 0]


def test_truth_labels_accept_raw_spans():
    assert truth_labels(_windows(4), [(1.0, 3.0)]) == [0, 1, 1, 0]


def _sig(values):
    return [AlarmSignal(float(i), v, frozenset()) for i, v in enumerate(values)]


def test_classification_report_confusion():
    rep = classification_report(_sig([0, 1, 0, 1]), [0, 1, 1, 0])
    assert rep.confusion == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}
    assert rep.accuracy == 0.5
    assert rep.precision == 0.5
    assert rep.recall == 0.5
    assert rep.false_alarm_rate == 0.5
    assert rep.n_windows == 4


def test_classification_report_degenerate_cases():
    rep = classification_report(_sig([0, 0]), [0, 0])
    assert rep.accuracy == 1.0
    assert rep.precision is None  # nothing predicted positive
    assert rep.recall is None     # nothing actually positive
    assert rep.false_alarm_rate == 0.0

    rep = classification_report(_sig([1, 1]), [1, 1])
    assert rep.false_alarm_rate == 0.0  # no negative windows exist


def test_classification_latency():
    rep = classification_report(_sig([0, 0, 1, 1, 0, 1]),
                                [0, 1, 1, 1, 0, 1],
                                flood_start_windows=[1, 5])
    assert rep.latency_windows == (1, 0)
    rep = classification_report(_sig([0, 1, 0, 0]), [0, 1, 1, 1],
                                flood_start_windows=[2])
    assert rep.latency_windows == (None,)  # never detected after onset


def test_classification_length_mismatch():
    with pytest.raises(ValueError):
        classification_report(_sig([0, 1]), [0, 1, 0])


def test_alarm_runs_edges():
    assert alarm_runs(_sig([0, 1, 1, 0, 1])) == [(1, 3), (4, 5)]
    assert alarm_runs(_sig([1, 1, 1])) == [(0, 3)]
    assert alarm_runs(_sig([0, 0])) == []
    assert alarm_runs(_sig([])) == []
