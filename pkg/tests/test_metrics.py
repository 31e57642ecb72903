"""Window folding: boundary membership, byte attribution, integrity checks."""

import pytest

from conftest import cbr_spec, det_scenario, make_flow
from floodgate import engine, metrics
from floodgate.errors import TraceIntegrityError
from floodgate.events import EventKind, OpenTransmission, PacketEvent
from floodgate.metrics import WindowAggregator, series


def _ev(t_ns, kind, pid, size=1000):
    return PacketEvent(t_ns, kind, pid, make_flow(), size)


def _agg(width=1.0, horizon=2.0, cap=1000):
    return WindowAggregator(width_s=width, horizon_s=horizon,
                            link_capacity=cap)


def test_straddling_transmission_splits_bytes_proportionally():
    """1500 bytes served over [0, 1.5) on a 1000 B/s link: the first
    window gets 1000 bytes (saturated), the second 500 (half idle)."""
    agg = _agg()
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0, 1500))
    agg.ingest(_ev(0, EventKind.SERVICE_START, 0, 1500))
    agg.ingest(_ev(1_500_000_000, EventKind.DEPARTURE, 0, 1500))
    w0, w1 = agg.close()
    assert w0.bytes_transmitted == 1000.0
    assert w1.bytes_transmitted == 500.0
    assert w0.bandwidth_utilization == 1.0
    assert w1.bandwidth_utilization == 0.5
    assert (w0.p_departures, w1.p_departures) == (0, 1)


def test_boundary_events_belong_to_the_closing_window():
    agg = _agg(horizon=3.0)
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0))
    agg.ingest(_ev(1_000_000_000, EventKind.ARRIVAL, 1))      # exactly 1.0 s
    agg.ingest(_ev(1_000_000_001, EventKind.ARRIVAL, 2))
    windows = agg.close()
    assert [w.p_arrivals for w in windows] == [2, 1, 0]


def test_lockstep_run_window_series():
    trace = engine.run(det_scenario([cbr_spec(1.0)]))
    ws = series(trace)
    assert len(ws) == 10
    # the t=1.0 arrival closes window 0, so it holds two arrivals
    assert [w.p_arrivals for w in ws] == [2] + [1] * 8 + [0]
    assert [w.p_departures for w in ws] == [1] * 10
    assert all(w.bytes_transmitted == 512.0 for w in ws)
    assert all(w.bandwidth_utilization == 0.5 for w in ws)
    assert all(w.max_buffer_occupancy == 0 for w in ws)
    assert all(w.mean_queue_length == 0.0 for w in ws)
    assert all(w.mean_wait_s == 0.0 for w in ws)
    assert [w.avg_packet_size for w in ws] == [512.0] * 9 + [0.0]
    assert ws[0].window_start_s == 0.0
    assert ws[-1].window_end_s == 10.0


def test_counts_are_conserved_across_windows():
    sc = det_scenario([cbr_spec(30.0, end=6.0)], cap=10_000, k=4,
                      horizon=6.0, window=0.7)
    trace = engine.run(sc)
    ws = series(trace)
    s = trace.summary
    assert sum(w.p_arrivals for w in ws) == s.arrivals
    assert sum(w.p_departures for w in ws) == s.departures
    assert sum(w.p_drops for w in ws) == s.drops
    assert max(w.max_buffer_occupancy for w in ws) == s.max_buffer
    assert all(0.0 <= w.bandwidth_utilization <= 1.0 for w in ws)
    # ragged final window still ends at the horizon
    assert ws[-1].window_end_s == pytest.approx(6.0)
    assert len(ws) == 9


def test_windows_without_events_are_zeroed():
    agg = _agg(horizon=3.0)
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0))
    agg.ingest(_ev(0, EventKind.SERVICE_START, 0))
    agg.ingest(_ev(100, EventKind.DEPARTURE, 0))
    windows = agg.close()
    w = windows[2]
    assert (w.p_arrivals, w.p_departures, w.p_drops) == (0, 0, 0)
    assert w.bytes_transmitted == 0.0
    assert w.flow_count == 0
    assert w.avg_packet_size == 0.0


def test_queue_length_accounting():
    # two packets wait a full second each while a third is served
    agg = _agg(horizon=4.0, cap=10_000)
    for pid in range(3):
        agg.ingest(_ev(0, EventKind.ARRIVAL, pid))
    agg.ingest(_ev(0, EventKind.SERVICE_START, 0))
    agg.ingest(_ev(1_000_000_000, EventKind.DEPARTURE, 0))
    agg.ingest(_ev(1_000_000_000, EventKind.SERVICE_START, 1))
    agg.ingest(_ev(2_000_000_000, EventKind.DEPARTURE, 1))
    agg.ingest(_ev(2_000_000_000, EventKind.SERVICE_START, 2))
    agg.ingest(_ev(3_000_000_000, EventKind.DEPARTURE, 2))
    ws = agg.close()
    assert [w.mean_queue_length for w in ws] == [2.0, 1.0, 0.0, 0.0]
    assert [w.max_buffer_occupancy for w in ws] == [2, 1, 0, 0]
    # waits credited to the departure's window: 0 s, 1 s, 2 s
    assert [w.mean_wait_s for w in ws] == [0.0, 1.0, 2.0, 0.0]


def test_flow_count_is_distinct_flows():
    agg = _agg(horizon=1.0)
    a = PacketEvent(0, EventKind.ARRIVAL, 0, make_flow(0), 100)
    b = PacketEvent(10, EventKind.ARRIVAL, 1, make_flow(1), 100)
    c = PacketEvent(20, EventKind.ARRIVAL, 2, make_flow(0), 100)
    for ev in (a, b, c):
        agg.ingest(ev)
    (w,) = agg.close()
    assert w.flow_count == 2
    assert w.avg_packet_size == 100.0


def test_open_transmission_settled_against_scheduled_end():
    agg = _agg(horizon=1.0)
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0))
    agg.ingest(_ev(0, EventKind.SERVICE_START, 0))
    open_tx = OpenTransmission(packet_id=0, size=1000, start_ns=0,
                               scheduled_end_ns=2_000_000_000)
    (w,) = agg.close(open_tx)
    assert w.bytes_transmitted == 500.0
    assert w.bandwidth_utilization == 0.5


def test_close_requires_matching_open_record():
    agg = _agg(horizon=1.0)
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0))
    agg.ingest(_ev(0, EventKind.SERVICE_START, 0))
    with pytest.raises(TraceIntegrityError):
        agg.close()  # transmission open but no record supplied
    wrong = OpenTransmission(packet_id=5, size=1000, start_ns=0,
                             scheduled_end_ns=2_000_000_000)
    agg2 = _agg(horizon=1.0)
    agg2.ingest(_ev(0, EventKind.ARRIVAL, 0))
    agg2.ingest(_ev(0, EventKind.SERVICE_START, 0))
    with pytest.raises(TraceIntegrityError):
        agg2.close(wrong)


def test_integrity_rejections():
    agg = _agg()
    agg.ingest(_ev(100, EventKind.ARRIVAL, 0))
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(50, EventKind.ARRIVAL, 1))  # time moved backwards
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(3_000_000_000, EventKind.ARRIVAL, 2))  # past horizon
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(200, EventKind.SERVICE_START, 9))  # never arrived
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(200, EventKind.DROP, 9))
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(200, EventKind.DEPARTURE, 0))  # no open transmission


def test_queue_len_cross_check():
    agg = _agg()
    agg.ingest(_ev(0, EventKind.ARRIVAL, 0), queue_len=1)
    with pytest.raises(TraceIntegrityError):
        agg.ingest(_ev(10, EventKind.ARRIVAL, 1), queue_len=5)


def test_double_close_rejected():
    agg = _agg()
    agg.close()
    with pytest.raises(TraceIntegrityError):
        agg.close()


def test_bad_width_rejected():
    with pytest.raises(ValueError):
        WindowAggregator(width_s=0.0, horizon_s=1.0, link_capacity=1000)


def test_series_width_override():
    trace = engine.run(det_scenario([cbr_spec(1.0)]))
    assert len(series(trace)) == 10
    assert len(series(trace, window_width_s=2.0)) == 5
    assert len(metrics.series(trace, window_width_s=4.0)) == 3
