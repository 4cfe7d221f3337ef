"""Command-line entry point: ``train``, ``eval`` and ``plot``."""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import List, Optional

from .agent import CheckpointError, ReplayError, TrainingDivergenceError
from .harness import (
    EvaluationError,
    MetricsLoadError,
    PlotOptions,
    TrainingError,
    compare_methods,
    emit_plot_data,
    evaluate,
    train,
)
from .harness.training import CONFIG_NAME
from .settings import ConfigError, ExperimentConfig, load_config
from .sim import ManeuverError, WorldConfigError
from .sim.trace import TraceError

HANDLED_ERRORS = (
    CheckpointError,
    ConfigError,
    EvaluationError,
    ManeuverError,
    MetricsLoadError,
    ReplayError,
    TraceError,
    TrainingDivergenceError,
    TrainingError,
    WorldConfigError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lane_change_dqn",
        description="Train and evaluate a lane-change DQN with an optional rule-based safety filter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="Train an agent and write checkpoint, metrics and config")
    p_train.add_argument("--config", type=Path, help="Key-value config file (defaults when omitted)")
    p_train.add_argument("--out", type=Path, required=True, help="Output directory")
    p_train.add_argument("--seed", type=int, help="Master seed (overrides run.master_seed)")
    p_train.add_argument("--episodes", type=int, help="Training episodes (overrides run.episodes)")
    p_train.add_argument("--no-filter", action="store_true", help="Disable the safety filter")
    p_train.add_argument("--resume", type=Path, help="Continue from this checkpoint")
    p_train.add_argument("--workers", type=int, help="Processes for the final evaluation")
    p_train.add_argument("--trace", action="store_true", help="Write per-episode trace files")
    p_train.add_argument("--quiet", action="store_true", help="No progress bar or per-episode lines")

    p_eval = sub.add_parser("eval", help="Evaluate a checkpoint greedily")
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--episodes", type=int, required=True)
    p_eval.add_argument("--config", type=Path,
                        help=f"Config file (defaults to {CONFIG_NAME} next to the checkpoint)")
    p_eval.add_argument("--seed", type=int, help="Master seed for evaluation worlds")
    p_eval.add_argument("--no-filter", action="store_true", help="Disable the safety filter")
    p_eval.add_argument("--compare", action="store_true", help="Run with and without the filter and tabulate")
    p_eval.add_argument("--workers", type=int, help="Evaluation processes (overrides run.workers)")
    p_eval.add_argument("--metrics", type=Path, help="Append evaluation rows to this metrics CSV")
    p_eval.add_argument("--trace-dir", type=Path, help="Write per-episode trace files here")
    p_eval.add_argument("--quiet", action="store_true")

    p_plot = sub.add_parser("plot", help="Emit lane-change series files and figure from a metrics CSV")
    p_plot.add_argument("--metrics", type=Path, required=True)
    p_plot.add_argument("--out", type=Path, required=True)
    p_plot.add_argument("--smooth", type=int, default=0, help="Moving-average window (0 = off)")
    p_plot.add_argument("--no-figure", action="store_true", help="Only write the series files")
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.seed is not None:
        config.run.master_seed = args.seed
    if getattr(args, "episodes", None) is not None and args.command == "train":
        config.run.episodes = args.episodes
    if args.no_filter:
        config.run.filter_on = False
    if getattr(args, "workers", None) is not None:
        config.run.workers = args.workers
    if getattr(args, "trace", False):
        config.run.write_trace = True
    config.validate()
    return config


def _eval_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        return load_config(args.config)
    sibling = args.checkpoint.parent / CONFIG_NAME
    if sibling.exists():
        return load_config(sibling)
    print(f"[Config] No {CONFIG_NAME} next to {args.checkpoint}; using defaults")
    return ExperimentConfig()


def _run_train(args: argparse.Namespace) -> None:
    config = load_config(args.config) if args.config is not None else ExperimentConfig()
    config = _apply_overrides(config, args)
    result = train(config, args.out, resume=args.resume, quiet=args.quiet)
    print(f"[Train] Checkpoint: {result.checkpoint_path}")
    print(f"[Train] Metrics: {result.metrics_path}")


def _run_eval(args: argparse.Namespace) -> None:
    config = _apply_overrides(_eval_config(args), args)
    if args.compare:
        compare_methods(
            args.checkpoint,
            args.episodes,
            config,
            workers=config.run.workers,
            trace_dir=args.trace_dir,
            quiet=args.quiet,
        )
        return
    evaluate(
        args.checkpoint,
        args.episodes,
        config.run.filter_on,
        config,
        workers=config.run.workers,
        metrics_path=args.metrics,
        trace_dir=args.trace_dir,
        quiet=args.quiet,
    )


def _run_plot(args: argparse.Namespace) -> None:
    options = PlotOptions(apply_smoothing=args.smooth > 0, smoothing_window=max(args.smooth, 1))
    emit_plot_data(args.metrics, args.out, options=options, render_figure=not args.no_figure)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"train": _run_train, "eval": _run_eval, "plot": _run_plot}
    try:
        handlers[args.command](args)
    except HANDLED_ERRORS as exc:
        print(f"[Error] {exc}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
