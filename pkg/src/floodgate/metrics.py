"""Windowed traffic features folded from an event trace.

The horizon is cut into fixed-width windows.  An event with timestamp t
belongs to the window that closes at or after t: boundary events land in
the closing window, matching the engine's tie order (departures and
arrivals sort before the window close at the same instant).

bytes_transmitted uses exact proportional attribution: a transmission
that straddles a boundary credits each window with the share of its bytes
served inside that window.  This is what keeps utilization at or below 1
by construction, including for the transmission still open when the
horizon is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import TraceIntegrityError
from .events import NS_PER_S, EventKind, s_to_ns

__all__ = ["MetricsWindow", "WindowAggregator", "series"]


@dataclass(frozen=True, slots=True)
class MetricsWindow:
    """Feature vector for one time window."""

    window_start_s: float
    window_end_s: float
    p_arrivals: int
    p_departures: int
    p_drops: int
    bytes_transmitted: float
    bandwidth_utilization: float
    flow_count: int
    avg_packet_size: float
    max_buffer_occupancy: int
    mean_queue_length: float
    mean_wait_s: float


@dataclass(slots=True)
class _Acc:
    arrivals: int = 0
    departures: int = 0
    drops: int = 0
    bytes_arrived: int = 0
    bytes_tx: float = 0.0
    flows: set = field(default_factory=set)
    max_buf: int = 0
    qlen_area_ns: int = 0
    wait_sum_ns: int = 0
    wait_count: int = 0


class WindowAggregator:
    """Streaming fold of packet events into per-window counters.

    Windows are finalized lazily: a window stays pending while the
    transmission occupying the server began before the window's end,
    because its byte share is only known once the departure is seen.
    """

    def __init__(self, width_s: float, horizon_s: float, link_capacity: int):
        if width_s <= 0:
            raise ValueError(f"window width must be > 0, got {width_s}")
        self.width_ns = s_to_ns(width_s)
        self.horizon_ns = s_to_ns(horizon_s)
        self.capacity = link_capacity
        self.n_windows = max(1, math.ceil(self.horizon_ns / self.width_ns))
        self._accs: dict[int, _Acc] = {}
        self._last_ns = 0
        self._cur_wait = 0
        self._open_tx = None          # (packet_id, size, start_ns)
        self._arrival_ns: dict[int, int] = {}
        self._wait_ns: dict[int, int] = {}
        self._finished = False

    # -- window helpers -----------------------------------------------------

    def _acc(self, idx: int) -> _Acc:
        acc = self._accs.get(idx)
        if acc is None:
            acc = self._accs[idx] = _Acc()
        return acc

    def _event_window(self, t_ns: int) -> int:
        # Boundary events belong to the closing window.
        idx = 0 if t_ns <= 0 else (t_ns - 1) // self.width_ns
        return min(idx, self.n_windows - 1)

    def _advance(self, t_ns: int) -> None:
        """Account the constant queue state over [last, t)."""
        t0 = self._last_ns
        if t_ns <= t0:
            return
        w = self.width_ns
        wait = self._cur_wait
        idx = t0 // w
        while t0 < t_ns:
            seg_end = min(t_ns, (idx + 1) * w)
            acc = self._acc(min(idx, self.n_windows - 1))
            acc.qlen_area_ns += wait * (seg_end - t0)
            if wait > acc.max_buf:
                acc.max_buf = wait
            t0 = seg_end
            idx += 1
        self._last_ns = t_ns

    def _distribute_bytes(self, start_ns: int, end_ns: int, size: int,
                          full_duration_ns: int) -> None:
        """Credit size * overlap/duration to every window under [start, end)."""
        if end_ns <= start_ns:
            return
        w = self.width_ns
        idx = start_ns // w
        t0 = start_ns
        while t0 < end_ns:
            seg_end = min(end_ns, (idx + 1) * w)
            acc = self._acc(min(idx, self.n_windows - 1))
            acc.bytes_tx += size * (seg_end - t0) / full_duration_ns
            t0 = seg_end
            idx += 1

    # -- public fold --------------------------------------------------------

    def ingest(self, event, queue_len: int | None = None) -> None:
        """Fold one event.  queue_len, when provided, cross-checks the
        reconstructed number of waiting packets after the event."""
        t = event.time_ns
        if t < self._last_ns:
            raise TraceIntegrityError(
                f"event at {t} ns after window fold reached {self._last_ns} ns")
        if t > self.horizon_ns:
            raise TraceIntegrityError(
                f"event at {t} ns beyond horizon {self.horizon_ns} ns")
        self._advance(t)
        idx = self._event_window(t)
        acc = self._acc(idx)
        kind = event.kind
        if kind is EventKind.ARRIVAL:
            acc.arrivals += 1
            acc.bytes_arrived += event.size
            acc.flows.add(event.flow)
            self._arrival_ns[event.packet_id] = t
            self._cur_wait += 1
        elif kind is EventKind.SERVICE_START:
            self._cur_wait -= 1
            try:
                arr = self._arrival_ns.pop(event.packet_id)
            except KeyError:
                raise TraceIntegrityError(
                    f"service start for unseen packet {event.packet_id}") from None
            self._wait_ns[event.packet_id] = t - arr
            self._open_tx = (event.packet_id, event.size, t)
        elif kind is EventKind.DEPARTURE:
            if self._open_tx is None or self._open_tx[0] != event.packet_id:
                raise TraceIntegrityError(
                    f"departure of packet {event.packet_id} does not match "
                    f"the open transmission")
            _pid, size, start = self._open_tx
            self._distribute_bytes(start, t, size, max(1, t - start))
            self._open_tx = None
            acc.departures += 1
            acc.wait_sum_ns += self._wait_ns.pop(event.packet_id)
            acc.wait_count += 1
        elif kind is EventKind.DROP:
            self._cur_wait -= 1
            acc.drops += 1
            try:
                del self._arrival_ns[event.packet_id]
            except KeyError:
                raise TraceIntegrityError(
                    f"drop for unseen packet {event.packet_id}") from None
        if queue_len is not None and queue_len != self._cur_wait:
            raise TraceIntegrityError(
                f"live queue length {queue_len} disagrees with folded "
                f"state {self._cur_wait} at {t} ns")

    def close(self, open_service=None) -> list[MetricsWindow]:
        """Advance to the horizon, settle the open transmission, and emit
        every window in order (windows without events are all zeros)."""
        if self._finished:
            raise TraceIntegrityError("window fold already closed")
        self._finished = True
        self._advance(self.horizon_ns)
        if self._open_tx is not None:
            pid, size, start = self._open_tx
            if open_service is None or open_service.packet_id != pid:
                raise TraceIntegrityError(
                    f"transmission of packet {pid} still open at the horizon "
                    f"but no matching open-service record was supplied")
            dur = max(1, open_service.scheduled_end_ns - open_service.start_ns)
            self._distribute_bytes(start, self.horizon_ns, size, dur)
            self._open_tx = None

        out = []
        w_ns = self.width_ns
        for idx in range(self.n_windows):
            acc = self._accs.get(idx, _Acc())
            start_ns = idx * w_ns
            end_ns = min((idx + 1) * w_ns, self.horizon_ns)
            width_s = (end_ns - start_ns) / NS_PER_S
            cap_bytes = self.capacity * width_s
            util = min(1.0, acc.bytes_tx / cap_bytes) if cap_bytes > 0 else 0.0
            out.append(MetricsWindow(
                window_start_s=start_ns / NS_PER_S,
                window_end_s=end_ns / NS_PER_S,
                p_arrivals=acc.arrivals,
                p_departures=acc.departures,
                p_drops=acc.drops,
                bytes_transmitted=acc.bytes_tx,
                bandwidth_utilization=util,
                flow_count=len(acc.flows),
                avg_packet_size=(acc.bytes_arrived / acc.arrivals
                                 if acc.arrivals else 0.0),
                max_buffer_occupancy=acc.max_buf,
                mean_queue_length=acc.qlen_area_ns / (end_ns - start_ns),
                mean_wait_s=(acc.wait_sum_ns / acc.wait_count / NS_PER_S
                             if acc.wait_count else 0.0),
            ))
        return out


def series(trace, window_width_s: float | None = None) -> list[MetricsWindow]:
    """Fold a whole trace into its window series."""
    width = window_width_s or trace.scenario.window_width_s
    agg = WindowAggregator(width_s=width,
                           horizon_s=trace.horizon_ns / NS_PER_S,
                           link_capacity=trace.scenario.link_capacity)
    for ev in trace.events:
        agg.ingest(ev)
    return agg.close(trace.open_service)
