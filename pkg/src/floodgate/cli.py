"""Command-line front end.

Subcommands:
  run                     simulate a scenario and write metrics/alarms/loss/report
  calibrate               bisect the flood rate to a target CBR loss
  validate                compare the engine against closed-form results
  sweep                   replicate a scenario across seeds and aggregate
  emit-default-scenario   write the stock three-flood scenario as JSON

Exit codes: 0 success, 2 configuration error, 3 calibration failure,
4 validation failure.  The FLOODGATE_LOG environment variable sets the
log level (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import calibrate as calibrate_mod
from . import detector, engine, metrics, queueing, traffic, validation
from .csvio import (write_alarms_csv, write_loss_csv, write_metrics_csv,
                    write_trace_csv)
from .errors import CalibrationError, ConfigError, UnstableSystemError
from .scenario import (ScenarioConfig, load_scenario, replace, save_scenario)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_VALIDATION = 4


def setup_logging() -> None:
    level_name = os.environ.get("FLOODGATE_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr)


def _load_or_default(args) -> ScenarioConfig:
    if args.scenario:
        sc = load_scenario(args.scenario)
    else:
        sc = traffic.build_default_scenario()
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, seed=args.seed)
    if getattr(args, "window", None) is not None:
        sc = replace(sc, window_width_s=args.window)
    if getattr(args, "no_attack", False):
        sc = traffic.without_attack(sc)
    return sc


def _flood_start_windows(sc: ScenarioConfig) -> list[int]:
    return [int(f.start_s // sc.window_width_s) for f in sc.attack.floods]


def analyze(sc: ScenarioConfig, trace) -> dict:
    """Windows, signals and the classification/loss summary for one run."""
    windows = metrics.series(trace)
    signals = detector.signal_series(windows, sc.detector, sc.buffer_k)
    truth = detector.truth_labels(windows, sc.attack)
    report = detector.classification_report(
        signals, truth, flood_start_windows=_flood_start_windows(sc))
    little = queueing.little_law_check(trace)
    loss_rows = queueing.loss_by_class(trace)
    return {"windows": windows, "signals": signals, "truth": truth,
            "report": report, "little": little, "loss_rows": loss_rows}


def build_report_doc(sc: ScenarioConfig, trace, analysis) -> dict:
    rep = analysis["report"]
    little = analysis["little"]
    s = trace.summary
    width = sc.window_width_s
    return {
        "seed": sc.seed,
        "horizon_s": sc.horizon_s,
        "window_width_s": width,
        "packets": {
            "arrivals": s.arrivals,
            "departures": s.departures,
            "drops": s.drops,
            "in_system_at_horizon": s.in_system_end,
        },
        "detection": {
            "accuracy": rep.accuracy,
            "precision": rep.precision,
            "recall": rep.recall,
            "confusion": rep.confusion,
            "false_alarm_rate": rep.false_alarm_rate,
            "latency_windows": list(rep.latency_windows),
            "latency_seconds": [None if l is None else l * width
                                for l in rep.latency_windows],
            "alarm_windows": sum(sig.value for sig in analysis["signals"]),
            "n_windows": rep.n_windows,
        },
        "little": {
            "lambda_measured": little.lambda_measured,
            "n_measured": little.n_measured,
            "w_measured_s": little.w_measured_s,
            "nq_measured": little.nq_measured,
            "wq_measured_s": little.wq_measured_s,
            "residual_n": little.residual_n,
            "residual_nq": little.residual_nq,
        },
        "loss": [{"class": r.traffic_class, "flood_index": r.flood_index,
                  "arrivals": r.arrivals, "drops": r.drops,
                  "loss_percent": r.loss_percent}
                 for r in analysis["loss_rows"]],
    }


def write_plots(out_dir: Path, analysis) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    windows = analysis["windows"]
    signals = analysis["signals"]
    t = [w.window_start_s for w in windows]
    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(10, 9))
    axes[0].plot(t, [w.p_arrivals for w in windows], label="arrivals")
    axes[0].plot(t, [w.p_drops for w in windows], label="drops")
    axes[0].set_ylabel("packets/window")
    axes[0].legend(loc="upper right")
    axes[1].plot(t, [w.bandwidth_utilization for w in windows], color="tab:green")
    axes[1].set_ylabel("utilization")
    axes[1].set_ylim(0, 1.05)
    axes[2].plot(t, [w.max_buffer_occupancy for w in windows], color="tab:orange")
    axes[2].set_ylabel("max buffer")
    axes[3].step(t, [sig.value for sig in signals], where="post", color="tab:red")
    axes[3].set_ylabel("alarm")
    axes[3].set_ylim(-0.05, 1.1)
    axes[3].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(out_dir / "timeline.png", dpi=120)
    plt.close(fig)


def cmd_run(args) -> int:
    sc = _load_or_default(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = engine.run(sc)
    analysis = analyze(sc, trace)

    write_metrics_csv(analysis["windows"], out_dir / "metrics.csv")
    write_alarms_csv(analysis["signals"], out_dir / "alarms.csv")
    write_loss_csv(analysis["loss_rows"], out_dir / "loss.csv")
    doc = build_report_doc(sc, trace, analysis)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.trace:
        write_trace_csv(trace, out_dir / "trace.csv")
    if args.plot:
        write_plots(out_dir, analysis)

    rep = analysis["report"]
    print(f"simulated {sc.horizon_s:g} s, {trace.summary.arrivals} arrivals, "
          f"{trace.summary.drops} drops")
    print(f"alarm windows: {doc['detection']['alarm_windows']} of "
          f"{rep.n_windows}; accuracy {rep.accuracy:.4f}")
    names = ["metrics.csv", "alarms.csv", "loss.csv", "report.json"]
    if args.trace:
        names.append("trace.csv")
    if args.plot:
        names.append("timeline.png")
    print(f"wrote {', '.join(names)} to {out_dir}")
    return EXIT_OK


def cmd_emit_default_scenario(args) -> int:
    sc = traffic.build_default_scenario(
        seed=args.seed if args.seed is not None else traffic.DEFAULT_SEED)
    save_scenario(sc, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    sc = _load_or_default(args)
    result = calibrate_mod.calibrate_flood_rate(
        sc, args.target, lo_factor=args.lo_factor, hi_factor=args.hi_factor)
    save_scenario(result.scenario, args.out)
    print(f"calibrated flood rate: {result.flood_rate_pps:.1f} packets/s "
          f"({result.evaluations} evaluations)")
    print(f"achieved CBR flood loss: {result.achieved_loss_percent:.2f}% "
          f"(target {args.target:g}%)")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validation.run_all(seed=args.seed, buffer_bias=args.buffer_bias,
                                 lam=args.little_lambda, mu=args.little_mu)
    for res in results:
        print(res.line())
    if all(r.passed for r in results):
        print("all checks passed")
        return EXIT_OK
    return EXIT_VALIDATION


def cmd_sweep(args) -> int:
    sc = _load_or_default(args)
    accuracies: list[float] = []
    false_alarm_rates: list[float] = []
    latencies: list[int] = []
    missed = 0
    for i in range(args.seeds):
        seed = sc.seed + i
        run_sc = replace(sc, seed=seed)
        trace = engine.run(run_sc)
        analysis = analyze(run_sc, trace)
        rep = analysis["report"]
        accuracies.append(rep.accuracy)
        false_alarm_rates.append(rep.false_alarm_rate)
        for lat in rep.latency_windows:
            if lat is None:
                missed += 1
            else:
                latencies.append(lat)
        log.info("seed %d: accuracy %.4f, false alarms %.4f",
                 seed, rep.accuracy, rep.false_alarm_rate)

    doc = {
        "seeds": args.seeds,
        "base_seed": sc.seed,
        "accuracy": {
            "mean": sum(accuracies) / len(accuracies),
            "min": min(accuracies),
            "per_seed": accuracies,
        },
        "false_alarm_rate": {
            "mean": sum(false_alarm_rates) / len(false_alarm_rates),
            "max": max(false_alarm_rates),
        },
        "detection_latency_windows": {
            "values": sorted(latencies),
            "mean": sum(latencies) / len(latencies) if latencies else None,
            "max": max(latencies) if latencies else None,
            "missed_floods": missed,
        },
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    print(f"mean accuracy {doc['accuracy']['mean']:.4f}, "
          f"min {doc['accuracy']['min']:.4f}, "
          f"mean false-alarm rate {doc['false_alarm_rate']['mean']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floodgate",
        description="Single-node flood simulation, metrics and detection")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate and write artifacts")
    run_p.add_argument("scenario", nargs="?", help="scenario JSON path "
                       "(omit for the stock scenario)")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--no-attack", action="store_true",
                       help="strip the flood schedule")
    run_p.add_argument("--trace", action="store_true",
                       help="also write the full event trace CSV")
    run_p.add_argument("--plot", action="store_true",
                       help="render timeline charts as PNG")
    run_p.add_argument("--window", type=float, default=None,
                       help="metrics window width in seconds")
    run_p.set_defaults(func=cmd_run)

    emit_p = sub.add_parser("emit-default-scenario",
                            help="write the stock scenario JSON")
    emit_p.add_argument("--out", default="scenario.json")
    emit_p.add_argument("--seed", type=int, default=None)
    emit_p.set_defaults(func=cmd_emit_default_scenario)

    cal_p = sub.add_parser("calibrate",
                           help="fit the flood rate to a target CBR loss")
    cal_p.add_argument("scenario", nargs="?")
    cal_p.add_argument("--target", type=float, default=36.0,
                       help="target CBR loss percent during floods")
    cal_p.add_argument("--out", default="calibrated_scenario.json")
    cal_p.add_argument("--seed", type=int, default=None)
    cal_p.add_argument("--lo-factor", type=float,
                       default=calibrate_mod.DEFAULT_LO_FACTOR,
                       help="low flood byte-rate bound, in link capacities")
    cal_p.add_argument("--hi-factor", type=float,
                       default=calibrate_mod.DEFAULT_HI_FACTOR,
                       help="high flood byte-rate bound, in link capacities")
    cal_p.set_defaults(func=cmd_calibrate)

    val_p = sub.add_parser("validate",
                           help="check the engine against closed forms")
    val_p.add_argument("--seed", type=int,
                       default=validation.DEFAULT_VALIDATE_SEED)
    val_p.add_argument("--little-lambda", type=float,
                       default=validation.LITTLE_LAMBDA)
    val_p.add_argument("--little-mu", type=float,
                       default=validation.LITTLE_MU)
    val_p.add_argument("--buffer-bias", type=int, default=0,
                       help="test hook: shift the effective buffer size")
    val_p.set_defaults(func=cmd_validate)

    sweep_p = sub.add_parser("sweep",
                             help="replicate across seeds and aggregate")
    sweep_p.add_argument("scenario", nargs="?")
    sweep_p.add_argument("--seeds", type=int, default=20,
                         help="number of consecutive seeds to run")
    sweep_p.add_argument("--seed", type=int, default=None,
                         help="base seed (scenario seed if omitted)")
    sweep_p.add_argument("--no-attack", action="store_true")
    sweep_p.add_argument("--out", default=None, help="aggregate JSON path")
    sweep_p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnstableSystemError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
