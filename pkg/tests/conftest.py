"""Shared builders for small, fully deterministic test scenarios."""

from floodgate.events import FlowKey, Protocol
from floodgate.scenario import (AttackSchedule, QueueMode, ScenarioConfig,
                                SourceKind, SourceSpec)


def make_flow(i=0, dport=9000, proto=Protocol.UDP):
    return FlowKey(src=f"h{i}", src_port=5000 + i, dst="srv",
                   dst_port=dport, protocol=proto)


def cbr_spec(rate_pps, size=512, start=0.0, end=10.0, i=0):
    return SourceSpec(kind=SourceKind.CBR, flow=make_flow(i),
                      packet_size=size, start_s=start, end_s=end,
                      rate_pps=rate_pps)


def poisson_spec(rate_pps, size=512, start=0.0, end=10.0, i=0):
    return SourceSpec(kind=SourceKind.POISSON, flow=make_flow(i),
                      packet_size=size, start_s=start, end_s=end,
                      rate_pps=rate_pps)


def ftp_spec(window, size=512, start=0.0, end=10.0, i=0, **kw):
    return SourceSpec(kind=SourceKind.FTP,
                      flow=make_flow(i, dport=21, proto=Protocol.TCP),
                      packet_size=size, start_s=start, end_s=end,
                      window=window, **kw)


def flood_spec(rate_pps, size=1024, start=2.0, end=4.0, i=9, dport=21,
               burst=False):
    return SourceSpec(kind=SourceKind.FLOOD, flow=make_flow(i, dport=dport),
                      packet_size=size, start_s=start, end_s=end,
                      rate_pps=rate_pps, burst=burst)


def det_scenario(sources, horizon=10.0, cap=1024, k=None, seed=1, floods=(),
                 window=1.0):
    """Deterministic-service scenario: service time = size / cap, exactly."""
    return ScenarioConfig(seed=seed, horizon_s=horizon, link_capacity=cap,
                          queue_mode=QueueMode.DETERMINISTIC, buffer_k=k,
                          sources=tuple(sources),
                          attack=AttackSchedule(floods=tuple(floods)),
                          window_width_s=window)


def mm_scenario(sources, mu, horizon=10.0, cap=1_000_000, k=None, seed=1,
                floods=(), window=1.0):
    return ScenarioConfig(seed=seed, horizon_s=horizon, link_capacity=cap,
                          queue_mode=QueueMode.MARKOVIAN, buffer_k=k,
                          sources=tuple(sources),
                          attack=AttackSchedule(floods=tuple(floods)),
                          window_width_s=window, service_rate_mu=mu)


def mini_flood_scenario(seed=1, flood_rate=200.0):
    """Small overload case: 25 kB/s link, one flood burst over [1, 3)."""
    return det_scenario(
        [cbr_spec(10.0, end=4.0)],
        horizon=4.0, cap=25_000, k=10, seed=seed,
        floods=[flood_spec(flood_rate, start=1.0, end=3.0)])
