"""Closed-form queueing results and law checks computed from event traces.

The central identities are N = lambda * W for the whole system and
Nq = lambda * Wq for the waiting line, where lambda counts only admitted
packets: traffic turned away at a full buffer never enters the system and
therefore does not contribute to the arrival rate these laws use.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import TraceIntegrityError, UnstableSystemError
from .events import NS_PER_S, EventKind
from .scenario import SourceKind

log = logging.getLogger(__name__)

RESIDUAL_EPSILON = 1e-9


@dataclass(frozen=True, slots=True)
class Mm1Metrics:
    """Steady-state means of the unbounded single-server Markovian queue."""

    rho: float
    mean_in_system: float      # N
    mean_sojourn_s: float      # W
    mean_waiting: float        # Nq
    mean_wait_s: float         # Wq


def mm1_mean_metrics(lam: float, mu: float) -> Mm1Metrics:
    """N = rho/(1-rho), W = 1/(mu-lambda), Nq = rho^2/(1-rho), Wq = rho/(mu-lambda)."""
    if lam < 0 or mu <= 0:
        raise ValueError(f"need lambda >= 0 and mu > 0, got {lam}, {mu}")
    if lam >= mu:
        raise UnstableSystemError(
            f"no steady state: lambda={lam} >= mu={mu}")
    rho = lam / mu
    return Mm1Metrics(
        rho=rho,
        mean_in_system=rho / (1.0 - rho),
        mean_sojourn_s=1.0 / (mu - lam),
        mean_waiting=rho * rho / (1.0 - rho),
        mean_wait_s=rho / (mu - lam),
    )


def mm1k_blocking(lam: float, mu: float, buffer_k: int) -> float:
    """Stationary blocking probability with buffer_k waiting slots.

    The system holds at most S = buffer_k + 1 packets (one in service).
    For rho != 1 the occupancy distribution is geometric and
    P(block) = (1-rho) rho^S / (1 - rho^(S+1)); at rho = 1 every one of
    the S+1 occupancy states is equally likely, so P(block) = 1/(S+1).
    """
    if lam < 0 or mu <= 0:
        raise ValueError(f"need lambda >= 0 and mu > 0, got {lam}, {mu}")
    if buffer_k < 0:
        raise ValueError(f"buffer_k must be >= 0, got {buffer_k}")
    s = buffer_k + 1
    rho = lam / mu
    if rho == 1.0:
        return 1.0 / (s + 1)
    return (1.0 - rho) * rho**s / (1.0 - rho**(s + 1))


@dataclass(frozen=True, slots=True)
class LittleReport:
    """Measured arrival rate, occupancies, delays and law residuals."""

    lambda_measured: float   # admitted packets per second
    n_measured: float        # time-averaged packets in system
    w_measured_s: float      # mean sojourn of departed packets
    nq_measured: float       # time-averaged packets waiting
    wq_measured_s: float     # mean wait of packets that reached service
    residual_n: float        # |N - lambda W| / max(N, eps)
    residual_nq: float


def little_law_check(trace) -> LittleReport:
    """Recompute occupancies and delays from the raw events and compare
    both sides of the law.

    Independent of the engine's internal counters: everything here is
    folded from the event list itself.  Unmatched lifecycles raise
    TraceIntegrityError.
    """
    horizon_ns = trace.horizon_ns
    in_sys = 0
    waiting = 0
    last_ns = 0
    area_sys = 0
    area_wait = 0
    arrival_ns: dict[int, int] = {}
    admitted = 0
    sojourn_sum = 0
    departures = 0
    wait_sum = 0
    started = 0

    for ev in trace.events:
        t = ev.time_ns
        if t < last_ns:
            raise TraceIntegrityError("events out of order")
        if t != last_ns:
            dt = t - last_ns
            area_sys += in_sys * dt
            area_wait += waiting * dt
            last_ns = t
        kind = ev.kind
        if kind is EventKind.ARRIVAL:
            arrival_ns[ev.packet_id] = t
            in_sys += 1
            waiting += 1
            admitted += 1
        elif kind is EventKind.SERVICE_START:
            if ev.packet_id not in arrival_ns:
                raise TraceIntegrityError(
                    f"service start for unknown packet {ev.packet_id}")
            waiting -= 1
            started += 1
            wait_sum += t - arrival_ns[ev.packet_id]
        elif kind is EventKind.DEPARTURE:
            try:
                arr = arrival_ns.pop(ev.packet_id)
            except KeyError:
                raise TraceIntegrityError(
                    f"departure for unknown packet {ev.packet_id}") from None
            in_sys -= 1
            departures += 1
            sojourn_sum += t - arr
        elif kind is EventKind.DROP:
            try:
                del arrival_ns[ev.packet_id]
            except KeyError:
                raise TraceIntegrityError(
                    f"drop for unknown packet {ev.packet_id}") from None
            in_sys -= 1
            waiting -= 1
            admitted -= 1  # blocked traffic never counts toward lambda

    dt = horizon_ns - last_ns
    if dt > 0:
        area_sys += in_sys * dt
        area_wait += waiting * dt

    horizon_s = horizon_ns / NS_PER_S
    lam = admitted / horizon_s if horizon_s else 0.0
    n = area_sys / horizon_ns if horizon_ns else 0.0
    nq = area_wait / horizon_ns if horizon_ns else 0.0
    w = sojourn_sum / departures / NS_PER_S if departures else 0.0
    wq = wait_sum / started / NS_PER_S if started else 0.0
    res_n = abs(n - lam * w) / max(n, RESIDUAL_EPSILON)
    res_nq = abs(nq - lam * wq) / max(nq, RESIDUAL_EPSILON)
    return LittleReport(lambda_measured=lam, n_measured=n, w_measured_s=w,
                        nq_measured=nq, wq_measured_s=wq,
                        residual_n=res_n, residual_nq=res_nq)


# ---------------------------------------------------------------------------
# Per-class loss accounting over attack intervals.

BASELINE_INDEX = 0  # row index used for time outside every flood interval

LOSS_CLASSES = (SourceKind.CBR, SourceKind.FTP)


@dataclass(frozen=True, slots=True)
class LossRow:
    traffic_class: str
    flood_index: int      # 1-based flood interval; 0 = outside all floods
    arrivals: int
    drops: int

    @property
    def loss_percent(self) -> float:
        return 100.0 * self.drops / self.arrivals if self.arrivals else 0.0


def loss_by_class(trace, attack=None) -> list[LossRow]:
    """Loss percentage per traffic class, split by flood interval.

    A packet belongs to an interval when its arrival time falls inside
    [start, end); arrivals outside every flood are collected into the
    baseline row (flood_index 0).  Classes with no arrivals in an
    interval are omitted and noted in the log.
    """
    scenario = trace.scenario
    if attack is None:
        attack = scenario.attack
    intervals = [(round(f.start_s * NS_PER_S), round(f.end_s * NS_PER_S))
                 for f in attack.floods]

    kind_by_flow = {s.flow: s.kind for s in scenario.all_sources()}
    counts: dict[tuple[SourceKind, int], list[int]] = {}

    dropped: set[int] = set()
    for ev in trace.events:
        if ev.kind is EventKind.DROP:
            dropped.add(ev.packet_id)

    for ev in trace.events:
        if ev.kind is not EventKind.ARRIVAL:
            continue
        kind = kind_by_flow.get(ev.flow)
        if kind not in LOSS_CLASSES:
            continue
        idx = BASELINE_INDEX
        for j, (t0, t1) in enumerate(intervals, start=1):
            if t0 <= ev.time_ns < t1:
                idx = j
                break
        cell = counts.setdefault((kind, idx), [0, 0])
        cell[0] += 1
        if ev.packet_id in dropped:
            cell[1] += 1

    rows: list[LossRow] = []
    for kind in LOSS_CLASSES:
        for idx in range(len(intervals) + 1):
            cell = counts.get((kind, idx))
            if cell is None:
                where = ("outside floods" if idx == BASELINE_INDEX
                         else f"flood {idx}")
                log.info("loss table: no %s arrivals %s; row omitted",
                         kind.value, where)
                continue
            rows.append(LossRow(traffic_class=kind.value, flood_index=idx,
                                arrivals=cell[0], drops=cell[1]))
    return rows
