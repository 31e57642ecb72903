"""CSV readers and writers for traces, window series, alarms and loss tables.

Integers are written exactly; every float is written with 12 significant
digits, which parses back to within one unit in the last written digit
and keeps files byte-stable across runs and platforms.
"""

from __future__ import annotations

import csv

from .detector import AlarmSignal, FiredCondition
from .events import EventKind, FlowKey, PacketEvent, Protocol
from .metrics import MetricsWindow
from .queueing import LossRow


def fmt_float(x: float) -> str:
    return format(float(x), ".12g")


TRACE_HEADER = ["time_ns", "kind", "packet_id", "src", "sport", "dst",
                "dport", "proto", "size_bytes"]


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(TRACE_HEADER)
        for ev in trace.events:
            f = ev.flow
            out.writerow([ev.time_ns, ev.kind.value, ev.packet_id, f.src,
                          f.src_port, f.dst, f.dst_port, f.protocol.value,
                          ev.size])


def read_trace_csv(path) -> list[PacketEvent]:
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            flow = FlowKey(src=row["src"], src_port=int(row["sport"]),
                           dst=row["dst"], dst_port=int(row["dport"]),
                           protocol=Protocol(row["proto"]))
            events.append(PacketEvent(time_ns=int(row["time_ns"]),
                                      kind=EventKind(row["kind"]),
                                      packet_id=int(row["packet_id"]),
                                      flow=flow,
                                      size=int(row["size_bytes"])))
    return events


METRICS_HEADER = ["window_start_s", "p_arrivals", "p_departures", "p_drops",
                  "bytes_tx", "utilization", "flow_count", "avg_pkt_size",
                  "max_buf", "mean_qlen", "mean_wait_s"]


def write_metrics_csv(windows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(METRICS_HEADER)
        for w in windows:
            out.writerow([fmt_float(w.window_start_s), w.p_arrivals,
                          w.p_departures, w.p_drops,
                          fmt_float(w.bytes_transmitted),
                          fmt_float(w.bandwidth_utilization), w.flow_count,
                          fmt_float(w.avg_packet_size),
                          w.max_buffer_occupancy,
                          fmt_float(w.mean_queue_length),
                          fmt_float(w.mean_wait_s)])


def read_metrics_csv(path, window_width_s: float | None = None
                     ) -> list[MetricsWindow]:
    """Windows parsed back from disk.

    window_end is reconstructed from consecutive starts (the width of the
    final window is assumed equal to its predecessor's unless given).
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(row)
    starts = [float(r["window_start_s"]) for r in rows]
    windows = []
    for i, r in enumerate(rows):
        if i + 1 < len(rows):
            end = starts[i + 1]
        elif window_width_s is not None:
            end = starts[i] + window_width_s
        elif i > 0:
            end = starts[i] + (starts[i] - starts[i - 1])
        else:
            end = starts[i] + 1.0
        windows.append(MetricsWindow(
            window_start_s=starts[i], window_end_s=end,
            p_arrivals=int(r["p_arrivals"]),
            p_departures=int(r["p_departures"]),
            p_drops=int(r["p_drops"]),
            bytes_transmitted=float(r["bytes_tx"]),
            bandwidth_utilization=float(r["utilization"]),
            flow_count=int(r["flow_count"]),
            avg_packet_size=float(r["avg_pkt_size"]),
            max_buffer_occupancy=int(r["max_buf"]),
            mean_queue_length=float(r["mean_qlen"]),
            mean_wait_s=float(r["mean_wait_s"])))
    return windows


ALARMS_HEADER = ["window_start_s", "signal", "fired_conditions"]

_CONDITION_ORDER = [FiredCondition.HIGH_UTILIZATION,
                    FiredCondition.DROPS_EQUAL_ARRIVALS,
                    FiredCondition.BUFFER_OVERFLOW,
                    FiredCondition.ABRUPT_CHANGE]


def write_alarms_csv(signals, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(ALARMS_HEADER)
        for sig in signals:
            conds = ";".join(c.value for c in _CONDITION_ORDER
                             if c in sig.fired_conditions)
            out.writerow([fmt_float(sig.window_start_s), sig.value, conds])


def read_alarms_csv(path) -> list[AlarmSignal]:
    signals = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            raw = row["fired_conditions"]
            conds = frozenset(FiredCondition(c) for c in raw.split(";") if c)
            signals.append(AlarmSignal(
                window_start_s=float(row["window_start_s"]),
                value=int(row["signal"]),
                fired_conditions=conds))
    return signals


LOSS_HEADER = ["class", "flood_index", "arrivals", "drops", "loss_percent"]


def write_loss_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(LOSS_HEADER)
        for r in rows:
            out.writerow([r.traffic_class, r.flood_index, r.arrivals,
                          r.drops, fmt_float(r.loss_percent)])


def read_loss_csv(path) -> list[LossRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(LossRow(traffic_class=row["class"],
                                flood_index=int(row["flood_index"]),
                                arrivals=int(row["arrivals"]),
                                drops=int(row["drops"])))
    return rows
