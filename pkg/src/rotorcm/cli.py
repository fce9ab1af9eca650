"""Command-line entry point: generate / stream / capture / extract / sweep / report."""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from rotorcm import evaluate as ev
from rotorcm import features as feat
from rotorcm import models as mdl
from rotorcm import reduce as red
from rotorcm import simgen, wire

USAGE_EXIT = 2
FAILURE_EXIT = 1


class UsageError(ValueError):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part]


def _default_out() -> str:
    return os.environ.get("ROTORCM_OUT_DIR", "out")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorcm",
        description="UAV blade condition-monitoring benchmark pipeline",
    )
    parser.add_argument("--config", help="JSON config file; flags given on the command line win")
    sub = parser.add_subparsers(dest="command", required=True)

    common_gen = argparse.ArgumentParser(add_help=False)
    common_gen.add_argument("--seed", type=int, default=42)
    common_gen.add_argument("--duration", type=float, default=60.0, help="trial duration in seconds")
    common_gen.add_argument("--sample-rate", type=float, default=800.0)
    common_gen.add_argument("--noise", type=float, default=0.02, help="noise sigma in g")

    p = sub.add_parser("generate", parents=[common_gen], help="synthesize the 27-trial campaign to CSV + manifest")
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("stream", help="emit a trial CSV over UDP")
    p.add_argument("--in", dest="infile", required=True, help="trial CSV from generate")
    p.add_argument("--dest", default="127.0.0.1:9750", help="addr:port")
    p.add_argument("--samples-per-packet", type=_positive_int, default=250)
    p.add_argument("--pps", type=float, default=None, help="packets per second cap")
    p.add_argument("--realtime", action="store_true", help="pace to the sample rate")
    p.add_argument("--sample-rate", type=float, default=800.0)

    p = sub.add_parser("capture", help="collect UDP telemetry to CSV")
    p.add_argument("--listen", default="127.0.0.1:9750", help="addr:port")
    p.add_argument("--sensors", default="1,2")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--idle-timeout", type=float, default=2.0)
    p.add_argument("--expected-packets", type=int, default=None)

    p = sub.add_parser("extract", parents=[common_gen], help="windows -> feature CSV")
    p.add_argument("--interval", type=_positive_int, required=True, help="window size in samples")
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", parents=[common_gen], help="full grid -> reports")
    p.add_argument("--mode", choices=["none", "stft-pca", "all-pca"], default="none")
    p.add_argument("--components", type=_int_list, default=None,
                   help="comma-separated PCA component counts (overrides the mode defaults)")
    p.add_argument("--intervals", default="all",
                   help="'all' or comma-separated window sizes in samples")
    p.add_argument("--models", default="knn,dt,rf,svc")
    p.add_argument("--paper-arithmetic", action="store_true",
                   help="inject the published per-interval feature counts into throughput")
    p.add_argument("--split-by-trial", action="store_true")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("report", help="re-emit reports from saved sweep.json")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default=None)
    return parser, sub


def _parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"expected addr:port, got {text!r}")
    return host, int(port)


def _signal_config(args) -> simgen.SignalConfig:
    return simgen.SignalConfig(
        sample_rate_hz=args.sample_rate,
        trial_duration_s=args.duration,
        noise_sigma_g=args.noise,
        seed=args.seed,
    )


def cmd_generate(args) -> int:
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    trials = simgen.synthesize_campaign(_signal_config(args))
    for trial in trials:
        simgen.write_trial_csv(trial, out / f"trial_{trial.trial_id:02d}.csv")
    simgen.write_campaign_manifest(trials, out / "manifest.json")
    print(f"wrote {len(trials)} trials and manifest.json to {out}")
    return 0


def cmd_stream(args) -> int:
    streams = simgen.read_trial_csv(args.infile, args.sample_rate)
    data = np.stack([streams[1].T, streams[2].T])
    trial = simgen.Trial(0, simgen.ConditionClass.NORMAL, data, args.sample_rate)
    stats = wire.emit_stream(
        trial, _parse_addr(args.dest), args.samples_per_packet,
        realtime=args.realtime, pps=args.pps,
    )
    print(f"sent {stats['packets_sent']} packets ({stats['bytes_sent']} bytes)")
    return 0


def cmd_capture(args) -> int:
    sensors = tuple(int(s) for s in args.sensors.split(","))
    collector = wire.Collector(sensors)
    host, port = _parse_addr(args.listen)
    collector.listen(host, port, args.idle_timeout, args.expected_packets)
    streams = collector.streams()
    out = Path(args.out or (Path(_default_out()) / "capture.csv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        fh.write("sensor_id,sample_index,ax_g,ay_g,az_g\n")
        for sensor in sensors:
            for i, row in enumerate(streams[sensor]):
                fh.write(f"{sensor},{i},{row[0]!r},{row[1]!r},{row[2]!r}\n")
    s = collector.stats
    print(
        f"received {s.packets_received} packets, {s.duplicates_dropped} duplicates, "
        f"{s.checksum_failures} checksum failures, {s.gaps_detected} gaps -> {out}"
    )
    return 0


def cmd_extract(args) -> int:
    trials = simgen.synthesize_campaign(_signal_config(args))
    windows = feat.campaign_windows(trials, args.interval)
    X, y, trial_ids, window_indices, stft_len = feat.extract_matrix(windows)
    out = Path(args.out or (Path(_default_out()) / f"features_{args.interval}.csv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    feat.write_features_csv(out, X, y, trial_ids, window_indices)
    print(f"wrote {X.shape[0]} x {X.shape[1]} feature matrix (stft_len={stft_len}) to {out}")
    return 0


def cmd_sweep(args) -> int:
    if args.intervals == "all":
        intervals = list(feat.TABLE_INTERVALS)
    else:
        intervals = _int_list(args.intervals)
    if args.paper_arithmetic:
        bad = [n for n in intervals if n not in ev.PUBLISHED_FEATURE_COUNTS]
        if bad:
            raise UsageError(f"--paper-arithmetic supports only the published intervals; got {bad}")
    modes = ev.grid_modes(args.mode)
    if args.components is not None:
        if args.mode == "none":
            raise UsageError("--components requires --mode stft-pca or all-pca")
        kind = "stft" if args.mode == "stft-pca" else "all"
        modes = [red.ReductionMode(kind, k) for k in args.components]
    model_names = [m for m in args.models.split(",") if m]
    for m in model_names:
        if m not in mdl.MODEL_NAMES:
            raise UsageError(f"unknown model {m!r}; choose from {mdl.MODEL_NAMES}")
    trials = simgen.synthesize_campaign(_signal_config(args))
    records = ev.run_sweep(
        trials, intervals, modes, model_names, seed=args.seed,
        sample_rate_hz=args.sample_rate, paper_arithmetic=args.paper_arithmetic,
        split_by_trial=args.split_by_trial, jobs=args.jobs,
    )
    written = ev.emit_report(records, args.out or _default_out())
    print(f"{len(records)} records -> {written['csv']}")
    print(written["best"])
    return 0


def cmd_report(args) -> int:
    records = ev.load_records(args.records)
    written = ev.emit_report(records, args.out or _default_out())
    print(f"{len(records)} records -> {written['csv']}")
    print(written["best"])
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "stream": cmd_stream,
    "capture": cmd_capture,
    "extract": cmd_extract,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def _apply_config(parser, sub, argv):
    """Pre-scan for --config and inject file values as subcommand defaults."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path:
        with open(path) as fh:
            overrides = json.load(fh)
        for subparser in sub.choices.values():
            subparser.set_defaults(**overrides)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = _build_parser()
    try:
        _apply_config(parser, sub, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rotorcm: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except Exception as exc:  # noqa: BLE001 - single-line diagnostic per contract
        print(f"rotorcm: {exc}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
