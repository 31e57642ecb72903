"""Traffic source state machines and the stock attack scenario.

Rate-driven sources (poisson, cbr, flood) produce their own arrival
clocks.  The ftp source has no clock: it keeps up to ``window`` packets
outstanding and reacts to acknowledgement feedback, growing the window
additively on success and halving it on loss.
"""

from __future__ import annotations

from .events import NS_PER_S, FlowKey, Protocol, s_to_ns
from .sampling import derive_rng, sample_exponential
from .scenario import (AttackSchedule, DetectorConfig, QueueMode,
                       ScenarioConfig, SourceKind, SourceSpec)


class RateSource:
    """Clock-driven arrivals: exact spacing for cbr (and burst floods),
    exponential spacing for poisson and flood sources."""

    def __init__(self, spec: SourceSpec, seed: int, index: int):
        self.spec = spec
        self.start_ns = s_to_ns(spec.start_s)
        self.end_ns = s_to_ns(spec.end_s)
        self._fixed_spacing = spec.kind is SourceKind.CBR or spec.burst
        if self._fixed_spacing:
            self.period_ns = max(1, round(NS_PER_S / spec.rate_pps))
            self._count = 0
        else:
            self._rng = derive_rng(seed, f"src{index}")

    def first_arrival_ns(self) -> int | None:
        if self._fixed_spacing:
            self._count = 1
            t = self.start_ns
        else:
            t = self.start_ns + s_to_ns(
                sample_exponential(self.spec.rate_pps, self._rng))
        return t if t < self.end_ns else None

    def next_arrival_ns(self, now_ns: int) -> int | None:
        """Arrival following the one that just fired at now_ns."""
        if self._fixed_spacing:
            t = self.start_ns + self._count * self.period_ns
            self._count += 1
        else:
            t = now_ns + s_to_ns(
                sample_exponential(self.spec.rate_pps, self._rng))
        return t if t < self.end_ns else None


# Successful-delivery acks are cumulative: the receiver coalesces up to
# ACK_STRIDE segments into one acknowledgement, so window openings arrive
# in steps and the sender emits back-to-back packet pairs.
ACK_STRIDE = 2


class FtpSource:
    """Window-limited sender with additive-increase/multiplicative-decrease.

    ``cwnd`` starts at 1 and grows by 1/cwnd per acknowledged departure up
    to the configured cap; any drop halves it (floor 1).  A new packet may
    be sent whenever fewer than floor(cwnd) packets are unacknowledged.
    Delivery acks are coalesced every ACK_STRIDE segments (flushed early
    when nothing else is outstanding), so a flush can release several
    sends at the same instant.
    """

    def __init__(self, spec: SourceSpec, seed: int, index: int):
        self.spec = spec
        self.start_ns = s_to_ns(spec.start_s)
        self.end_ns = s_to_ns(spec.end_s)
        self.cap = float(spec.window)
        self.cwnd = 1.0
        self.unacked = 0
        self.held_acks = 0
        self.feedback_delay_ns = s_to_ns(spec.feedback_delay_s)
        self.loss_detect_delay_ns = s_to_ns(spec.loss_detect_delay_s)

    def can_send(self, now_ns: int) -> bool:
        return (self.start_ns <= now_ns < self.end_ns
                and self.unacked < int(self.cwnd))

    def note_sent(self) -> None:
        self.unacked += 1

    def ack_feedback(self, dropped: bool) -> None:
        """Digest the fate of one previously sent packet."""
        if self.unacked <= self.held_acks:
            raise ValueError("feedback without an outstanding packet")
        if dropped:
            self.unacked -= 1
            self.cwnd = max(1.0, self.cwnd / 2.0)
        else:
            self.held_acks += 1
        self._flush_held()

    def _flush_held(self) -> None:
        # Coalesced acks apply once ACK_STRIDE accumulate, or as soon as
        # no other packet is outstanding (nothing left to coalesce with).
        if not self.held_acks:
            return
        if self.held_acks < ACK_STRIDE and self.held_acks < self.unacked:
            return
        for _ in range(self.held_acks):
            self.unacked -= 1
            self.cwnd = min(self.cap, self.cwnd + 1.0 / self.cwnd)
        self.held_acks = 0


def build_source(spec: SourceSpec, seed: int, index: int):
    if spec.kind is SourceKind.FTP:
        return FtpSource(spec, seed, index)
    return RateSource(spec, seed, index)


def aggregate_rate_pps(sources) -> float:
    """Nominal packet rate of the clock-driven sources in a list."""
    return sum(s.rate_pps for s in sources if s.rate_pps is not None)


# ---------------------------------------------------------------------------
# Stock scenario: a single server draining a 250 kB/s link, carrying three
# cbr flows and two ftp transfers, attacked by three sequential udp floods
# aimed at ports 21, 5060 and 1580.  Service is exponential (the system is
# treated as an M/M/1 queue with a finite buffer); the rate is sized so the
# link keeps up with the legitimate mix and saturates under flood.  Flood
# rate dwarfs both the link capacity and the legitimate load so that nearly
# every packet in a flood window is turned away.

DEFAULT_SEED = 1
DEFAULT_LINK_CAPACITY = 250_000  # bytes/s
DEFAULT_BUFFER_K = 50
DEFAULT_HORIZON_S = 60.0
# capacity over the midpoint of the two packet sizes in play (512, 1024)
DEFAULT_SERVICE_MU = DEFAULT_LINK_CAPACITY / 768.0
DEFAULT_FLOOD_RATE_PPS = 5000.0
DEFAULT_FLOOD_PACKET = 1024
DEFAULT_LEGIT_PACKET = 512
FLOOD_PORTS = (21, 5060, 1580)
FLOOD_INTERVALS = ((12.0, 22.0), (30.0, 40.0), (48.0, 58.0))


def default_flood_specs(rate_pps: float = DEFAULT_FLOOD_RATE_PPS,
                        horizon_s: float = DEFAULT_HORIZON_S) -> tuple[SourceSpec, ...]:
    floods = []
    for i, (port, (t0, t1)) in enumerate(zip(FLOOD_PORTS, FLOOD_INTERVALS)):
        floods.append(SourceSpec(
            kind=SourceKind.FLOOD,
            flow=FlowKey(src=f"atk{i + 1}", src_port=40000 + i, dst="srv",
                         dst_port=port, protocol=Protocol.UDP),
            packet_size=DEFAULT_FLOOD_PACKET,
            start_s=t0, end_s=min(t1, horizon_s),
            rate_pps=rate_pps,
        ))
    return tuple(floods)


def build_default_scenario(seed: int = DEFAULT_SEED,
                           with_attack: bool = True) -> ScenarioConfig:
    """The stock three-flood scenario used by the command-line tools."""
    sources = []
    for i in range(3):
        # senders run free-phase clocks: spread the starts so the three
        # streams interleave instead of arriving as synchronized triples
        sources.append(SourceSpec(
            kind=SourceKind.CBR,
            flow=FlowKey(src=f"h{i + 1}", src_port=5000 + i, dst="srv",
                         dst_port=9000 + i, protocol=Protocol.UDP),
            packet_size=DEFAULT_LEGIT_PACKET,
            start_s=i / 90.0, end_s=DEFAULT_HORIZON_S,
            rate_pps=30.0,
        ))
    for i in range(2):
        sources.append(SourceSpec(
            kind=SourceKind.FTP,
            flow=FlowKey(src=f"h{i + 4}", src_port=1024 + i, dst="srv",
                         dst_port=21, protocol=Protocol.TCP),
            packet_size=DEFAULT_LEGIT_PACKET,
            start_s=0.0, end_s=DEFAULT_HORIZON_S,
            window=6,
        ))
    sources.append(SourceSpec(
        kind=SourceKind.POISSON,
        flow=FlowKey(src="h6", src_port=5100, dst="srv", dst_port=9100,
                     protocol=Protocol.UDP),
        packet_size=256,
        start_s=0.0, end_s=DEFAULT_HORIZON_S,
        rate_pps=20.0,
    ))
    floods = default_flood_specs() if with_attack else ()

    sc = ScenarioConfig(
        seed=seed,
        horizon_s=DEFAULT_HORIZON_S,
        link_capacity=DEFAULT_LINK_CAPACITY,
        queue_mode=QueueMode.MARKOVIAN,
        buffer_k=DEFAULT_BUFFER_K,
        sources=tuple(sources),
        attack=AttackSchedule(floods=floods),
        window_width_s=1.0,
        service_rate_mu=DEFAULT_SERVICE_MU,
        detector=DetectorConfig(),
    )
    if with_attack:
        legit = aggregate_rate_pps(sc.sources)
        assert DEFAULT_FLOOD_RATE_PPS >= 10 * legit, \
            "stock flood must swamp the legitimate load"
        assert (DEFAULT_FLOOD_RATE_PPS * DEFAULT_FLOOD_PACKET
                >= 10 * DEFAULT_LINK_CAPACITY), \
            "stock flood must swamp the link capacity"
    return sc


def without_attack(sc: ScenarioConfig) -> ScenarioConfig:
    from .scenario import replace
    return replace(sc, attack=AttackSchedule(floods=()))


def scale_flood_rate(sc: ScenarioConfig, rate_pps: float) -> ScenarioConfig:
    """Same scenario with every flood source set to the given packet rate."""
    import dataclasses
    from .scenario import replace
    floods = tuple(dataclasses.replace(f, rate_pps=rate_pps)
                   for f in sc.attack.floods)
    return replace(sc, attack=AttackSchedule(floods=floods))
