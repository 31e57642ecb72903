"""Scenario configuration: queue parameters, traffic sources, detector knobs.

A scenario is a plain value object; together with its seed it fully
determines a simulation run.  Scenarios round-trip through a versioned
JSON document, and loading rejects unknown fields so that typos fail
loudly instead of silently changing an experiment.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .events import FlowKey, Protocol

SCHEMA_VERSION = 1

MAX_SEED = 2**64 - 1


class SourceKind(str, enum.Enum):
    POISSON = "poisson"
    CBR = "cbr"
    FTP = "ftp"
    FLOOD = "flood"


class QueueMode(str, enum.Enum):
    # Service time drawn from Exponential(mu), independent of packet size.
    MARKOVIAN = "markovian"
    # Service time = size / link_capacity.
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True, slots=True)
class SourceSpec:
    """One traffic source bound to a single flow.

    ``rate_pps`` drives poisson, cbr and flood sources.  ``window`` is the
    congestion-window cap for ftp sources, whose send times are dictated
    by acknowledgement feedback rather than a clock: a departure is acked
    after a round trip (``feedback_delay_s``) while a drop at the
    bottleneck is signalled back almost immediately
    (``loss_detect_delay_s``), so retransmissions re-probe the queue while
    it is still congested.
    """

    kind: SourceKind
    flow: FlowKey
    packet_size: int
    start_s: float
    end_s: float
    rate_pps: float | None = None
    window: int | None = None
    feedback_delay_s: float = 0.08
    loss_detect_delay_s: float = 0.002
    burst: bool = False  # flood only: fixed spacing instead of poisson


@dataclass(frozen=True, slots=True)
class AttackSchedule:
    """The flood sources layered on top of legitimate traffic."""

    floods: tuple[SourceSpec, ...] = ()

    def intervals(self) -> list[tuple[float, float]]:
        return [(f.start_s, f.end_s) for f in self.floods]


@dataclass(frozen=True, slots=True)
class DetectorConfig:
    util_threshold: float = 0.85
    drop_arrival_ratio_threshold: float = 0.9
    require_buffer_full: bool = True
    ewma_alpha: float = 0.3
    ewma_k: float = 3.0
    consecutive_windows: int = 1
    # The abrupt-change stage is advisory unless this is set.
    require_abrupt_change: bool = False
    ewma_floor: float = 1e-6


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    seed: int
    horizon_s: float
    link_capacity: int  # bytes per second
    queue_mode: QueueMode
    buffer_k: int | None  # waiting slots excluding the server; None = unbounded
    sources: tuple[SourceSpec, ...]
    attack: AttackSchedule = AttackSchedule()
    window_width_s: float = 1.0
    service_rate_mu: float | None = None  # packets/s, markovian mode only
    detector: DetectorConfig = DetectorConfig()

    def all_sources(self) -> tuple[SourceSpec, ...]:
        return self.sources + self.attack.floods


def _check_source(i: int, label: str, s: SourceSpec, errors: list[str]) -> None:
    where = f"{label}[{i}]"
    if s.packet_size <= 0:
        errors.append(f"{where}.packet_size: must be > 0, got {s.packet_size}")
    if not s.start_s < s.end_s:
        errors.append(f"{where}: active interval [{s.start_s}, {s.end_s}) is empty")
    if not 0 <= s.flow.src_port <= 65535:
        errors.append(f"{where}.flow.src_port: out of range {s.flow.src_port}")
    if not 0 <= s.flow.dst_port <= 65535:
        errors.append(f"{where}.flow.dst_port: out of range {s.flow.dst_port}")
    if s.kind is SourceKind.FTP:
        if s.window is None or s.window < 1:
            errors.append(f"{where}.window: ftp needs an integer window >= 1")
        if s.feedback_delay_s <= 0 or s.loss_detect_delay_s <= 0:
            errors.append(f"{where}: ftp feedback delays must be > 0")
    else:
        if s.rate_pps is None or s.rate_pps <= 0:
            errors.append(f"{where}.rate_pps: {s.kind.value} needs a rate > 0")
    if s.kind is SourceKind.FLOOD and s.flow.protocol is not Protocol.UDP:
        errors.append(f"{where}: flood sources must use udp")


def validate_scenario(sc: ScenarioConfig) -> None:
    """Raise ConfigError listing every violated field."""
    errors: list[str] = []
    if not isinstance(sc.seed, int) or not 0 <= sc.seed <= MAX_SEED:
        errors.append(f"seed: must be an integer in [0, 2**64), got {sc.seed!r}")
    if sc.horizon_s <= 0:
        errors.append(f"horizon_s: must be > 0, got {sc.horizon_s}")
    if sc.link_capacity <= 0:
        errors.append(f"link_capacity: must be > 0, got {sc.link_capacity}")
    if sc.window_width_s <= 0:
        errors.append(f"window_width_s: must be > 0, got {sc.window_width_s}")
    if sc.buffer_k is not None and sc.buffer_k < 0:
        errors.append(f"buffer_k: must be >= 0 or null, got {sc.buffer_k}")
    if sc.queue_mode is QueueMode.MARKOVIAN:
        if sc.service_rate_mu is None or sc.service_rate_mu <= 0:
            errors.append("service_rate_mu: markovian mode needs a rate > 0")
    d = sc.detector
    if not 0 < d.util_threshold <= 1:
        errors.append(f"detector.util_threshold: must be in (0, 1], got {d.util_threshold}")
    if d.drop_arrival_ratio_threshold < 0:
        errors.append("detector.drop_arrival_ratio_threshold: must be >= 0")
    if not 0 < d.ewma_alpha <= 1:
        errors.append(f"detector.ewma_alpha: must be in (0, 1], got {d.ewma_alpha}")
    if d.ewma_k <= 0:
        errors.append(f"detector.ewma_k: must be > 0, got {d.ewma_k}")
    if d.consecutive_windows < 1:
        errors.append("detector.consecutive_windows: must be >= 1")
    if d.ewma_floor < 0:
        errors.append("detector.ewma_floor: must be >= 0")
    for i, s in enumerate(sc.sources):
        _check_source(i, "sources", s, errors)
    for i, s in enumerate(sc.attack.floods):
        _check_source(i, "attack.floods", s, errors)
    if errors:
        raise ConfigError(errors)


# ---------------------------------------------------------------------------
# JSON round trip.  Parsing is strict: unknown keys are configuration errors.

def _flow_to_dict(f: FlowKey) -> dict:
    return {"src": f.src, "src_port": f.src_port, "dst": f.dst,
            "dst_port": f.dst_port, "protocol": f.protocol.value}


def _source_to_dict(s: SourceSpec) -> dict:
    d = {
        "kind": s.kind.value,
        "flow": _flow_to_dict(s.flow),
        "packet_size": s.packet_size,
        "start_s": s.start_s,
        "end_s": s.end_s,
    }
    if s.rate_pps is not None:
        d["rate_pps"] = s.rate_pps
    if s.window is not None:
        d["window"] = s.window
    if s.kind is SourceKind.FTP:
        d["feedback_delay_s"] = s.feedback_delay_s
        d["loss_detect_delay_s"] = s.loss_detect_delay_s
    if s.burst:
        d["burst"] = True
    return d


def scenario_to_dict(sc: ScenarioConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": sc.seed,
        "horizon_s": sc.horizon_s,
        "link_capacity": sc.link_capacity,
        "queue_mode": sc.queue_mode.value,
        "service_rate_mu": sc.service_rate_mu,
        "buffer_k": sc.buffer_k,
        "window_width_s": sc.window_width_s,
        "sources": [_source_to_dict(s) for s in sc.sources],
        "attack": {"floods": [_source_to_dict(s) for s in sc.attack.floods]},
        "detector": {f.name: getattr(sc.detector, f.name)
                     for f in fields(DetectorConfig)},
    }


def save_scenario(sc: ScenarioConfig, path) -> None:
    validate_scenario(sc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(sc), fh, indent=2)
        fh.write("\n")


def _reject_unknown(d: dict, allowed: set[str], where: str, errors: list[str]) -> None:
    for key in d:
        if key not in allowed:
            errors.append(f"{where}: unknown field {key!r}")


def _parse_enum(cls, value, where: str, errors: list[str]):
    try:
        return cls(value)
    except ValueError:
        errors.append(f"{where}: {value!r} is not one of "
                      f"{[m.value for m in cls]}")
        return None


def _parse_flow(d, where: str, errors: list[str]) -> FlowKey | None:
    if not isinstance(d, dict):
        errors.append(f"{where}: expected an object")
        return None
    _reject_unknown(d, {"src", "src_port", "dst", "dst_port", "protocol"},
                    where, errors)
    proto = _parse_enum(Protocol, d.get("protocol"), f"{where}.protocol", errors)
    try:
        return FlowKey(src=str(d["src"]), src_port=int(d["src_port"]),
                       dst=str(d["dst"]), dst_port=int(d["dst_port"]),
                       protocol=proto or Protocol.UDP)
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc!r}")
        return None


_SOURCE_KEYS = {"kind", "flow", "packet_size", "start_s", "end_s", "rate_pps",
                "window", "feedback_delay_s", "loss_detect_delay_s", "burst"}


def _parse_source(d, where: str, errors: list[str]) -> SourceSpec | None:
    if not isinstance(d, dict):
        errors.append(f"{where}: expected an object")
        return None
    _reject_unknown(d, _SOURCE_KEYS, where, errors)
    kind = _parse_enum(SourceKind, d.get("kind"), f"{where}.kind", errors)
    flow = _parse_flow(d.get("flow", {}), f"{where}.flow", errors)
    if kind is None or flow is None:
        return None
    try:
        return SourceSpec(
            kind=kind, flow=flow,
            packet_size=int(d["packet_size"]),
            start_s=float(d["start_s"]), end_s=float(d["end_s"]),
            rate_pps=None if d.get("rate_pps") is None else float(d["rate_pps"]),
            window=None if d.get("window") is None else int(d["window"]),
            feedback_delay_s=float(d.get("feedback_delay_s", 0.08)),
            loss_detect_delay_s=float(d.get("loss_detect_delay_s", 0.002)),
            burst=bool(d.get("burst", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc!r}")
        return None


_TOP_KEYS = {"schema_version", "seed", "horizon_s", "link_capacity",
             "queue_mode", "service_rate_mu", "buffer_k", "window_width_s",
             "sources", "attack", "detector"}


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["document: expected a JSON object"])
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    _reject_unknown(doc, _TOP_KEYS, "document", errors)

    mode = _parse_enum(QueueMode, doc.get("queue_mode", "deterministic"),
                       "queue_mode", errors)
    sources: list[SourceSpec] = []
    for i, sd in enumerate(doc.get("sources", [])):
        s = _parse_source(sd, f"sources[{i}]", errors)
        if s is not None:
            sources.append(s)
    floods: list[SourceSpec] = []
    attack = doc.get("attack", {})
    if not isinstance(attack, dict):
        errors.append("attack: expected an object")
        attack = {}
    _reject_unknown(attack, {"floods"}, "attack", errors)
    for i, sd in enumerate(attack.get("floods", [])):
        s = _parse_source(sd, f"attack.floods[{i}]", errors)
        if s is not None:
            floods.append(s)

    det = doc.get("detector", {})
    det_fields = {f.name for f in fields(DetectorConfig)}
    if not isinstance(det, dict):
        errors.append("detector: expected an object")
        det = {}
    _reject_unknown(det, det_fields, "detector", errors)
    if errors:
        raise ConfigError(errors)

    sc = ScenarioConfig(
        seed=int(doc.get("seed", 0)),
        horizon_s=float(doc.get("horizon_s", 0)),
        link_capacity=int(doc.get("link_capacity", 0)),
        queue_mode=mode,
        buffer_k=None if doc.get("buffer_k") is None else int(doc["buffer_k"]),
        sources=tuple(sources),
        attack=AttackSchedule(floods=tuple(floods)),
        window_width_s=float(doc.get("window_width_s", 1.0)),
        service_rate_mu=(None if doc.get("service_rate_mu") is None
                         else float(doc["service_rate_mu"])),
        detector=DetectorConfig(**det),
    )
    validate_scenario(sc)
    return sc


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"document: not valid JSON ({exc})"]) from exc
    return scenario_from_dict(doc)


def replace(sc: ScenarioConfig, **changes) -> ScenarioConfig:
    """dataclasses.replace that tolerates our frozen nested config."""
    import dataclasses
    return dataclasses.replace(sc, **changes)
