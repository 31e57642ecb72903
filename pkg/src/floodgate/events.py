"""Packet lifecycle records emitted by the queue engine.

Every packet produces an ``arrival`` event followed by either a ``drop``
(buffer full at arrival) or a ``service_start``/``departure`` pair.  Times
are integer nanoseconds so traces are exactly reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import TraceIntegrityError

NS_PER_S = 1_000_000_000


def s_to_ns(seconds: float) -> int:
    return round(seconds * NS_PER_S)


def ns_to_s(ns: int) -> float:
    return ns / NS_PER_S


class Protocol(str, enum.Enum):
    UDP = "udp"
    TCP = "tcp"


class EventKind(str, enum.Enum):
    ARRIVAL = "arrival"
    SERVICE_START = "service_start"
    DEPARTURE = "departure"
    DROP = "drop"


@dataclass(frozen=True, slots=True)
class FlowKey:
    """Five-tuple identifying one traffic flow."""

    src: str
    src_port: int
    dst: str
    dst_port: int
    protocol: Protocol


@dataclass(frozen=True, slots=True)
class PacketEvent:
    time_ns: int
    kind: EventKind
    packet_id: int
    flow: FlowKey
    size: int

    @property
    def time_s(self) -> float:
        return self.time_ns / NS_PER_S


@dataclass(frozen=True, slots=True)
class OpenTransmission:
    """A service still in progress when the simulation horizon was reached."""

    packet_id: int
    size: int
    start_ns: int
    scheduled_end_ns: int


# Legal follow-up kinds while walking one packet's lifecycle.
_NEXT = {
    None: {EventKind.ARRIVAL},
    EventKind.ARRIVAL: {EventKind.SERVICE_START, EventKind.DROP},
    EventKind.SERVICE_START: {EventKind.DEPARTURE},
    EventKind.DEPARTURE: set(),
    EventKind.DROP: set(),
}


def validate_lifecycles(events) -> dict[int, list[PacketEvent]]:
    """Group events by packet and verify ordering and state transitions.

    Returns a mapping packet_id -> events in trace order.  Raises
    TraceIntegrityError on out-of-order timestamps or an illegal
    lifecycle (e.g. a departure with no service start).
    """
    last_ns = -1
    lifecycles: dict[int, list[PacketEvent]] = {}
    for ev in events:
        if ev.time_ns < last_ns:
            raise TraceIntegrityError(
                f"event at {ev.time_ns} ns arrived after {last_ns} ns")
        last_ns = ev.time_ns
        seq = lifecycles.setdefault(ev.packet_id, [])
        prev = seq[-1].kind if seq else None
        if ev.kind not in _NEXT[prev]:
            raise TraceIntegrityError(
                f"packet {ev.packet_id}: {ev.kind.value} cannot follow "
                f"{prev.value if prev else 'nothing'}")
        seq.append(ev)
    return lifecycles
