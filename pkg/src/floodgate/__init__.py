"""Single-server flood simulation, windowed metrics and alarm generation.

The package simulates a bottleneck network node as a finite-buffer FCFS
queue, folds the resulting packet trace into per-window traffic features,
raises alarms from those features, and checks everything against
closed-form queueing results.
"""

from .engine import EventTrace, QueueSimulator, SimSummary, run
from .events import (EventKind, FlowKey, OpenTransmission, PacketEvent,
                     Protocol)
from .metrics import MetricsWindow, WindowAggregator, series
from .detector import (AlarmSignal, DetectionReport, Detector, EwmaState,
                       FiredCondition, alarm_runs, classification_report,
                       ewma_update, rule_conditions, signal_series,
                       truth_labels)
from .queueing import (LittleReport, LossRow, Mm1Metrics, little_law_check,
                       loss_by_class, mm1_mean_metrics, mm1k_blocking)
from .scenario import (AttackSchedule, DetectorConfig, QueueMode,
                       ScenarioConfig, SourceKind, SourceSpec, load_scenario,
                       save_scenario, validate_scenario)
from .traffic import build_default_scenario, without_attack
from .calibrate import CalibrationResult, calibrate_flood_rate
from .errors import (CalibrationError, ConfigError, EngineStateError,
                     FloodgateError, TraceIntegrityError, UnstableSystemError)

__version__ = "0.1.0"

__all__ = [
    "AlarmSignal", "AttackSchedule", "CalibrationError", "CalibrationResult",
    "ConfigError", "DetectionReport", "Detector", "DetectorConfig",
    "EngineStateError", "EventKind", "EventTrace", "EwmaState",
    "FiredCondition", "FloodgateError", "FlowKey", "LittleReport", "LossRow",
    "MetricsWindow", "Mm1Metrics", "OpenTransmission", "PacketEvent",
    "Protocol", "QueueMode", "QueueSimulator", "ScenarioConfig",
    "SimSummary", "SourceKind", "SourceSpec", "TraceIntegrityError",
    "UnstableSystemError", "WindowAggregator", "alarm_runs",
    "build_default_scenario", "calibrate_flood_rate",
    "classification_report", "ewma_update", "little_law_check",
    "load_scenario", "loss_by_class", "mm1_mean_metrics", "mm1k_blocking",
    "rule_conditions", "run", "save_scenario", "series", "signal_series",
    "truth_labels", "validate_scenario", "without_attack",
]
