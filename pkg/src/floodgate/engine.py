"""Single-server finite-buffer FCFS queue driven by a deterministic event loop.

The engine works on integer nanoseconds and dispatches events in
nondecreasing time, breaking ties by a fixed kind priority (departures
before arrivals before bookkeeping) and then by insertion sequence.  Given
the same scenario and seed it reproduces the exact same event trace.

A packet arriving to an idle server enters service immediately; arriving
to a full buffer it is dropped on the spot, which is a normal, counted
outcome rather than an error.  Packets still in the system when the
horizon is reached are neither departures nor drops.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import EngineStateError
from .events import (NS_PER_S, EventKind, OpenTransmission, PacketEvent,
                     s_to_ns)
from .sampling import derive_rng, sample_exponential
from .scenario import QueueMode, ScenarioConfig, validate_scenario
from .traffic import FtpSource, build_source

# Tie priority at equal timestamps.  Window closing is handled by the
# metrics fold, which places boundary events before the close; the
# constant is listed here to pin the full ordering in one place.
PRIO_DEPARTURE = 0
PRIO_ARRIVAL = 1
PRIO_FEEDBACK = 2
PRIO_WINDOW_CLOSE = 3

_FB_START = 0
_FB_DEPARTED = 1
_FB_DROPPED = 2


@dataclass(slots=True)
class SimSummary:
    """Counters and time integrals maintained by the engine itself."""

    arrivals: int = 0
    drops: int = 0
    departures: int = 0
    service_starts: int = 0
    in_system_end: int = 0
    max_buffer: int = 0
    area_in_system_ns: int = 0   # integral of packets-in-system over time
    area_waiting_ns: int = 0     # integral of buffered (waiting) packets
    busy_ns: int = 0
    sum_sojourn_ns: int = 0      # departure - arrival, summed over departures
    sum_wait_ns: int = 0         # service start - arrival, over started packets
    horizon_ns: int = 0

    @property
    def admitted(self) -> int:
        return self.arrivals - self.drops

    @property
    def drop_fraction(self) -> float:
        return self.drops / self.arrivals if self.arrivals else 0.0

    @property
    def mean_in_system(self) -> float:
        return self.area_in_system_ns / self.horizon_ns if self.horizon_ns else 0.0

    @property
    def mean_waiting(self) -> float:
        return self.area_waiting_ns / self.horizon_ns if self.horizon_ns else 0.0

    @property
    def mean_sojourn_s(self) -> float:
        return (self.sum_sojourn_ns / self.departures / NS_PER_S
                if self.departures else 0.0)

    @property
    def utilization(self) -> float:
        return self.busy_ns / self.horizon_ns if self.horizon_ns else 0.0


@dataclass
class EventTrace:
    """Complete ordered record of one simulation run."""

    scenario: ScenarioConfig
    events: list[PacketEvent]
    horizon_ns: int
    open_service: OpenTransmission | None
    summary: SimSummary

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


class QueueSimulator:
    """One run of a scenario.

    collect_trace=False keeps only the summary counters, which makes very
    long validation runs cheap.  buffer_bias is a test hook that shifts
    the effective buffer size; production callers leave it at 0.
    """

    def __init__(self, scenario: ScenarioConfig, collect_trace: bool = True,
                 buffer_bias: int = 0):
        validate_scenario(scenario)
        self.scenario = scenario
        self.collect = collect_trace
        self.horizon_ns = s_to_ns(scenario.horizon_s)
        if scenario.buffer_k is None:
            self.capacity_k = None
        else:
            self.capacity_k = max(0, scenario.buffer_k + buffer_bias)

        specs = scenario.all_sources()
        self.sources = [build_source(s, scenario.seed, i)
                        for i, s in enumerate(specs)]
        self.flows = [s.flow for s in specs]
        self.sizes = [s.packet_size for s in specs]

        self._svc_rng = derive_rng(scenario.seed, "service")
        if scenario.queue_mode is QueueMode.MARKOVIAN:
            mu = scenario.service_rate_mu
            rng = self._svc_rng

            def svc_ns(size: int) -> int:
                return max(1, round(sample_exponential(mu, rng) * NS_PER_S))
        else:
            cap = scenario.link_capacity

            def svc_ns(size: int) -> int:
                return max(1, (size * NS_PER_S) // cap)
        self._svc_ns = svc_ns

        self.events: list[PacketEvent] = []
        self.summary = SimSummary(horizon_ns=self.horizon_ns)
        self._heap: list = []
        self._seq = 0
        self._next_pid = 0
        self._buffer: list = []      # FIFO of (pid, src_idx, size, arrival_ns)
        self._buf_head = 0           # popleft index; list beats deque here
        self._in_service = None
        self._service_span = None    # (start_ns, end_ns) of the open service

    # -- scheduling helpers -------------------------------------------------

    def _push(self, t_ns: int, code: int, payload) -> None:
        heapq.heappush(self._heap, (t_ns, code, self._seq, payload))
        self._seq += 1

    def _schedule_source(self, idx: int, t_ns: int | None) -> None:
        if t_ns is not None:
            self._push(t_ns, PRIO_ARRIVAL, idx)

    # -- event emission -----------------------------------------------------

    def _emit(self, t_ns: int, kind: EventKind, pid: int, src_idx: int,
              size: int) -> None:
        if self.collect:
            self.events.append(
                PacketEvent(t_ns, kind, pid, self.flows[src_idx], size))

    # -- queue mechanics ----------------------------------------------------

    def _start_service(self, t_ns: int, pkt) -> None:
        pid, src_idx, size, arr_ns = pkt
        self._emit(t_ns, EventKind.SERVICE_START, pid, src_idx, size)
        s = self.summary
        s.service_starts += 1
        s.sum_wait_ns += t_ns - arr_ns
        end_ns = t_ns + self._svc_ns(size)
        self._in_service = pkt
        self._service_span = (t_ns, end_ns)
        self._push(end_ns, PRIO_DEPARTURE, None)

    def _admit(self, t_ns: int, src_idx: int) -> None:
        pid = self._next_pid
        self._next_pid += 1
        size = self.sizes[src_idx]
        self._emit(t_ns, EventKind.ARRIVAL, pid, src_idx, size)
        s = self.summary
        s.arrivals += 1
        pkt = (pid, src_idx, size, t_ns)
        if self._in_service is None:
            self._start_service(t_ns, pkt)
        elif (self.capacity_k is None
              or len(self._buffer) - self._buf_head < self.capacity_k):
            self._buffer.append(pkt)
            depth = len(self._buffer) - self._buf_head
            if depth > s.max_buffer:
                s.max_buffer = depth
        else:
            self._emit(t_ns, EventKind.DROP, pid, src_idx, size)
            s.drops += 1
            src = self.sources[src_idx]
            if isinstance(src, FtpSource):
                self._push(t_ns + src.loss_detect_delay_ns, PRIO_FEEDBACK,
                           (src_idx, _FB_DROPPED))

    def _complete_service(self, t_ns: int) -> None:
        if self._in_service is None:
            raise EngineStateError("departure scheduled with an idle server")
        pid, src_idx, size, arr_ns = self._in_service
        self._emit(t_ns, EventKind.DEPARTURE, pid, src_idx, size)
        s = self.summary
        s.departures += 1
        s.sum_sojourn_ns += t_ns - arr_ns
        self._in_service = None
        self._service_span = None
        src = self.sources[src_idx]
        if isinstance(src, FtpSource):
            self._push(t_ns + src.feedback_delay_ns, PRIO_FEEDBACK,
                       (src_idx, _FB_DEPARTED))
        if self._buf_head < len(self._buffer):
            head = self._buffer[self._buf_head]
            self._buf_head += 1
            if self._buf_head > 4096:  # reclaim consumed prefix
                del self._buffer[:self._buf_head]
                self._buf_head = 0
            self._start_service(t_ns, head)

    def _ftp_feedback(self, t_ns: int, src_idx: int, what: int) -> None:
        src = self.sources[src_idx]
        if what != _FB_START:
            src.ack_feedback(dropped=(what == _FB_DROPPED))
        while src.can_send(t_ns):
            src.note_sent()
            self._admit(t_ns, src_idx)

    # -- main loop ----------------------------------------------------------

    def run(self) -> EventTrace:
        for idx, src in enumerate(self.sources):
            if isinstance(src, FtpSource):
                self._push(src.start_ns, PRIO_FEEDBACK, (idx, _FB_START))
            else:
                self._schedule_source(idx, src.first_arrival_ns())

        heap = self._heap
        horizon = self.horizon_ns
        s = self.summary
        last_ns = 0
        while heap:
            t_ns, code, _seq, payload = heapq.heappop(heap)
            if t_ns > horizon:
                break
            if t_ns != last_ns:
                dt = t_ns - last_ns
                waiting = len(self._buffer) - self._buf_head
                in_sys = waiting + (self._in_service is not None)
                s.area_waiting_ns += waiting * dt
                s.area_in_system_ns += in_sys * dt
                if self._in_service is not None:
                    s.busy_ns += dt
                last_ns = t_ns
            if code == PRIO_DEPARTURE:
                self._complete_service(t_ns)
            elif code == PRIO_ARRIVAL:
                self._admit(t_ns, payload)
                self._schedule_source(
                    payload, self.sources[payload].next_arrival_ns(t_ns))
            else:
                self._ftp_feedback(t_ns, *payload)

        dt = horizon - last_ns
        if dt > 0:
            waiting = len(self._buffer) - self._buf_head
            in_sys = waiting + (self._in_service is not None)
            s.area_waiting_ns += waiting * dt
            s.area_in_system_ns += in_sys * dt
            if self._in_service is not None:
                s.busy_ns += dt

        s.in_system_end = (len(self._buffer) - self._buf_head
                           + (self._in_service is not None))
        open_service = None
        if self._in_service is not None:
            pid, _src_idx, size, _arr = self._in_service
            start_ns, end_ns = self._service_span
            open_service = OpenTransmission(pid, size, start_ns, end_ns)
        return EventTrace(scenario=self.scenario, events=self.events,
                          horizon_ns=horizon, open_service=open_service,
                          summary=s)


def run(scenario: ScenarioConfig, collect_trace: bool = True,
        buffer_bias: int = 0) -> EventTrace:
    """Simulate one scenario and return its event trace."""
    return QueueSimulator(scenario, collect_trace=collect_trace,
                          buffer_bias=buffer_bias).run()
