"""Compare simulated queues against closed-form results.

Runs the same self checks the `floodgate validate` subcommand wires up,
printing measured vs expected side by side.  Shorter horizons than the
full gate, so this finishes in a few seconds.
"""

from floodgate.queueing import mm1_mean_metrics, mm1k_blocking
from floodgate.validation import check_blocking, check_little


def main():
    m = mm1_mean_metrics(5.0, 10.0)
    print("closed forms for lambda=5, mu=10:")
    print(f"  mean packets in system  {m.mean_in_system:.4f}")
    print(f"  mean time in system     {m.mean_sojourn_s:.4f} s")
    print(f"  blocking at buffer 20   "
          f"{mm1k_blocking(9.0, 10.0, 20):.6f} (lambda=9)")
    print()

    little, means = check_little(horizon_s=2000.0)
    print(little.line())
    print(means.line())

    blocking = check_blocking(min_arrivals=300_000)
    print(blocking.line())


if __name__ == "__main__":
    main()
