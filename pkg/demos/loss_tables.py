"""Per-class packet loss inside and outside the flood bursts.

At the stock flood rate the link is overwhelmed roughly twenty-fold and
both classes lose over 90% of their packets.  Dialing the flood down to
about twice the link drain rate moves the queue to the saturation knee,
where the window-limited senders (which keep retransmitting into the
congestion) lose a visibly larger fraction than the constant-rate ones.
"""

from floodgate import engine, traffic
from floodgate.queueing import loss_by_class


def print_table(sc, title):
    rows = loss_by_class(engine.run(sc))
    spans = {0: "baseline"}
    for i, (t0, t1) in enumerate(sc.attack.intervals(), start=1):
        spans[i] = f"flood {i} [{t0:.0f}s, {t1:.0f}s)"

    print(title)
    print(f"{'interval':<22}{'class':<8}{'arrivals':>10}{'drops':>8}"
          f"{'loss %':>8}")
    for row in rows:
        print(f"{spans[row.flood_index]:<22}{row.traffic_class:<8}"
              f"{row.arrivals:>10}{row.drops:>8}{row.loss_percent:>8.2f}")
    print()


def main():
    stock = traffic.build_default_scenario()
    rate = stock.attack.floods[0].rate_pps
    print_table(stock, f"stock flood rate ({rate:.0f} pkt/s):")

    knee = 2.0 * stock.link_capacity / stock.attack.floods[0].packet_size
    print_table(traffic.scale_flood_rate(stock, knee),
                f"near the saturation knee ({knee:.0f} pkt/s):")


if __name__ == "__main__":
    main()
