"""Two-stage flood detector operating on the window series.

Stage one smooths selected features with an exponentially weighted moving
average and flags abrupt level shifts; it is advisory by default.  Stage
two raises the binary alarm when, within one window, bandwidth
utilization is saturated, drops rival arrivals, and the waiting buffer
touched its capacity.  The conjunction must hold for a configurable
number of consecutive windows before the signal goes high, and the signal
returns low after the first full window where the conjunction fails.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .scenario import DetectorConfig
from .metrics import MetricsWindow


class FiredCondition(str, enum.Enum):
    HIGH_UTILIZATION = "HighUtilization"
    DROPS_EQUAL_ARRIVALS = "DropsEqualArrivals"
    BUFFER_OVERFLOW = "BufferOverflow"
    ABRUPT_CHANGE = "AbruptChange"


@dataclass(frozen=True, slots=True)
class AlarmSignal:
    window_start_s: float
    value: int  # 0 or 1
    fired_conditions: frozenset[FiredCondition]


@dataclass(frozen=True, slots=True)
class EwmaState:
    mean: float
    dev: float


def ewma_update(state: EwmaState | None, x: float, alpha: float,
                k: float, floor: float) -> tuple[EwmaState, bool]:
    """Advance the smoothed mean/deviation pair by one sample.

    Returns the new state and whether the sample is an abrupt change,
    judged against the previous state: |x - mean| > k * max(dev, floor).
    The first sample only primes the state and never fires.
    """
    if state is None:
        return EwmaState(mean=x, dev=0.0), False
    shift = abs(x - state.mean)
    abrupt = shift > k * max(state.dev, floor)
    new = EwmaState(mean=alpha * x + (1.0 - alpha) * state.mean,
                    dev=alpha * shift + (1.0 - alpha) * state.dev)
    return new, abrupt


# Features watched by the advisory abrupt-change stage.
EWMA_FEATURES = ("p_arrivals", "p_drops", "bandwidth_utilization")


def rule_conditions(window: MetricsWindow, cfg: DetectorConfig,
                    capacity_k: int | None) -> set[FiredCondition]:
    """Evaluate the threshold clauses for one window (no smoothing state)."""
    fired: set[FiredCondition] = set()
    if window.bandwidth_utilization >= cfg.util_threshold:
        fired.add(FiredCondition.HIGH_UTILIZATION)
    if (window.p_arrivals > 0
            and window.p_drops >= cfg.drop_arrival_ratio_threshold
            * window.p_arrivals):
        fired.add(FiredCondition.DROPS_EQUAL_ARRIVALS)
    if (capacity_k is not None
            and window.max_buffer_occupancy == capacity_k):
        fired.add(FiredCondition.BUFFER_OVERFLOW)
    return fired


class Detector:
    """Stateful fold over the window series producing one AlarmSignal each."""

    def __init__(self, cfg: DetectorConfig, capacity_k: int | None):
        self.cfg = cfg
        self.capacity_k = capacity_k
        self._ewma: dict[str, EwmaState | None] = {f: None for f in EWMA_FEATURES}
        self._streak = 0
        self._raised = False

    def decide(self, window: MetricsWindow) -> AlarmSignal:
        cfg = self.cfg
        fired = rule_conditions(window, cfg, self.capacity_k)

        abrupt = False
        for feature in EWMA_FEATURES:
            x = float(getattr(window, feature))
            self._ewma[feature], hit = ewma_update(
                self._ewma[feature], x, cfg.ewma_alpha, cfg.ewma_k,
                cfg.ewma_floor)
            abrupt = abrupt or hit
        if abrupt:
            fired.add(FiredCondition.ABRUPT_CHANGE)

        core = {FiredCondition.HIGH_UTILIZATION,
                FiredCondition.DROPS_EQUAL_ARRIVALS}
        if cfg.require_buffer_full:
            core.add(FiredCondition.BUFFER_OVERFLOW)
        if cfg.require_abrupt_change:
            core.add(FiredCondition.ABRUPT_CHANGE)
        holds = core <= fired

        if holds:
            self._streak += 1
            if self._streak >= cfg.consecutive_windows:
                self._raised = True
        else:
            # One full failing window lowers the signal.
            self._streak = 0
            self._raised = False

        return AlarmSignal(window_start_s=window.window_start_s,
                           value=1 if (self._raised and holds) else 0,
                           fired_conditions=frozenset(fired))


def signal_series(windows, cfg: DetectorConfig,
                  capacity_k: int | None) -> list[AlarmSignal]:
    det = Detector(cfg, capacity_k)
    return [det.decide(w) for w in windows]


# ---------------------------------------------------------------------------
# Ground truth and per-window classification.

def truth_labels(windows, attack) -> list[int]:
    """1 for every window that overlaps any flood interval, else 0."""
    spans = attack.intervals() if hasattr(attack, "intervals") else list(attack)
    labels = []
    for w in windows:
        hit = any(w.window_start_s < end and w.window_end_s > start
                  for start, end in spans)
        labels.append(1 if hit else 0)
    return labels


@dataclass(frozen=True, slots=True)
class DetectionReport:
    accuracy: float
    precision: float | None
    recall: float | None
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int
    n_windows: int
    false_alarm_rate: float  # flagged share of the non-attack windows
    latency_windows: tuple[int | None, ...]  # per flood; None = missed

    @property
    def confusion(self) -> dict[str, int]:
        return {"tp": self.true_positives, "fp": self.false_positives,
                "tn": self.true_negatives, "fn": self.false_negatives}


def classification_report(signals, truth: list[int],
                          flood_start_windows: list[int] | None = None
                          ) -> DetectionReport:
    """Per-window confusion of the alarm signal against ground truth.

    flood_start_windows, when given, adds per-flood detection latency:
    the distance in windows from each flood's first window to the first
    high signal at or after it.
    """
    if len(signals) != len(truth):
        raise ValueError(
            f"signal covers {len(signals)} windows but truth covers "
            f"{len(truth)}; the horizons differ")
    tp = fp = tn = fn = 0
    for sig, label in zip(signals, truth):
        if sig.value == 1 and label == 1:
            tp += 1
        elif sig.value == 1:
            fp += 1
        elif label == 1:
            fn += 1
        else:
            tn += 1
    total = len(truth)
    accuracy = (tp + tn) / total if total else 1.0
    precision = tp / (tp + fp) if (tp + fp) else None
    recall = tp / (tp + fn) if (tp + fn) else None
    far = fp / (fp + tn) if (fp + tn) else 0.0

    latencies: list[int | None] = []
    if flood_start_windows:
        for start in flood_start_windows:
            hit = next((i for i in range(start, len(signals))
                        if signals[i].value == 1), None)
            latencies.append(None if hit is None else hit - start)
    return DetectionReport(accuracy=accuracy, precision=precision,
                           recall=recall, true_positives=tp,
                           false_positives=fp, true_negatives=tn,
                           false_negatives=fn, n_windows=total,
                           false_alarm_rate=far,
                           latency_windows=tuple(latencies))


def alarm_runs(signals) -> list[tuple[int, int]]:
    """Maximal runs of consecutive high windows as (start, end) indexes,
    end exclusive."""
    runs = []
    start = None
    for i, sig in enumerate(signals):
        if sig.value == 1 and start is None:
            start = i
        elif sig.value == 0 and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(signals)))
    return runs
