"""Command-line entry point: ``train``, ``eval``, ``sweep`` and ``plot-data``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .errors import (
    CheckpointFormatError,
    CheckpointMismatch,
    ConfigError,
    NumericalFailure,
    PlotDataError,
)
from .harness import emit_plot_data, evaluate, sweep, train

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


def _config(path) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _print_report(report) -> None:
    print(f"{'policy':<12}{'mean':>12}{'final':>12}")
    for name, stats in report.policies.items():
        print(f"{name:<12}{stats.mean:>12.4f}{stats.final:>12.4f}")
    print(f"oracle agreement: {report.oracle_agreement:.3f}")


def cmd_train(args) -> int:
    cfg = _config(args.config)
    result = train(cfg, seed=args.seed, out_dir=args.out)
    last = result.records[-1]
    print(f"trained {len(result.records)} epochs in {result.seconds:.1f}s; final mean reward {last.mean_reward:.4f}")
    print(f"metrics: {result.metrics_path}")
    print(f"checkpoint: {result.checkpoint_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args.config)
    out = args.out if args.out is not None else Path(args.checkpoint).parent
    report = evaluate(args.checkpoint, cfg, out)
    _print_report(report)
    print(f"report: {Path(out) / 'eval_report.json'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args.config)
    if args.seeds < 1:
        raise ConfigError("--seeds", "must be >= 1")
    out = args.out if args.out is not None else cfg.out_dir
    outcomes = sweep(cfg, args.seeds, out, workers=args.workers)
    for o in outcomes:
        print(f"seed {o.seed}: " + ", ".join(f"{k}={v.mean:.3f}" for k, v in o.report.policies.items()))
    print(f"summary: {Path(out) / 'sweep_summary.csv'}")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    curve, bars = emit_plot_data(args.metrics, args.out, args.eval_report)
    print(f"wrote {curve} and {bars}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moe-offload", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one agent")
    t.add_argument("--config", help="TOML config (defaults if omitted)")
    t.add_argument("--seed", type=int, help="run seed, overrides the config")
    t.add_argument("--out", help="output directory, overrides the config")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint against the reference policies")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--config")
    e.add_argument("--out", help="defaults to the checkpoint's directory")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="train and evaluate several consecutive seeds")
    s.add_argument("--config")
    s.add_argument("--seeds", type=int, required=True, help="number of seeds")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1, help="parallel processes")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("plot-data", help="turn a metrics CSV into plot-ready series")
    d.add_argument("--metrics", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--eval-report", help="eval_report.json supplying the Oracle bar")
    d.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, CheckpointMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, PlotDataError, CheckpointFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
