"""Training loop, greedy evaluation and the filtered/unfiltered comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..agent import Checkpoint, DQNAgent, NetworkParams, load_checkpoint, save_checkpoint
from ..settings import ExperimentConfig, load_config, save_config
from .episode import EpisodeMode, episode_seed, eval_episode_seed, run_episode
from .metrics import (
    EpisodeMetrics,
    RunSummary,
    RunSummaryCalculator,
    append_metrics,
    format_results_table,
    method_name,
    truncate_metrics,
)

CHECKPOINT_NAME = "checkpoint.lcdqn"
METRICS_NAME = "metrics.csv"
CONFIG_NAME = "config.cfg"
TRACE_DIR_NAME = "traces"
# Seed stream for exploration and replay sampling, apart from world seeds.
AGENT_STREAM = 7
BANNER = "=" * 60


class TrainingError(Exception):
    """Raised when a training run cannot set up its outputs."""


class EvaluationError(Exception):
    """Raised for evaluation requests that cannot produce a summary."""


@dataclass
class TrainingResult:
    checkpoint_path: Path
    metrics_path: Path
    episodes: List[EpisodeMetrics] = field(default_factory=list)
    evaluation: Optional[EvaluationResult] = None


@dataclass
class EvaluationResult:
    summary: RunSummary
    episodes: List[EpisodeMetrics]


def trace_file(trace_dir: Path, phase: str, episode_index: int) -> Path:
    return trace_dir / f"trace_{phase}_{episode_index}.jsonl"


def agent_rng(master_seed: int, episodes_done: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, AGENT_STREAM, episodes_done]))


def _as_config(config: ExperimentConfig | str | Path) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        config.validate()
        return config
    return load_config(config)


def _prepare_out_dir(out_dir: str | Path) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        marker = out / ".write_test"
        marker.write_text("")
        marker.unlink()
    except OSError as exc:
        raise TrainingError(f"Output directory {out} is not writable: {exc}") from exc
    return out


def train(
    config: ExperimentConfig | str | Path,
    out_dir: str | Path,
    *,
    resume: Optional[str | Path] = None,
    quiet: bool = False,
) -> TrainingResult:
    """Train for ``run.episodes`` episodes, then evaluate greedily.

    Metrics are appended after every episode, the checkpoint is rewritten every
    ``run.checkpoint_every`` episodes and at the end. With ``resume`` the run
    continues after the last episode stored in that checkpoint.
    """
    config = _as_config(config)
    run = config.run
    out = _prepare_out_dir(out_dir)
    checkpoint_path = out / CHECKPOINT_NAME
    metrics_path = out / METRICS_NAME
    trace_dir = out / TRACE_DIR_NAME

    start_episode = 0
    if resume is not None:
        checkpoint = load_checkpoint(resume)
        if checkpoint.training_state is None:
            raise TrainingError(f"Checkpoint {resume} has no resume block.")
        if checkpoint.train_config != config.train:
            print(f"[Train] Warning: checkpoint TrainConfig {checkpoint.train_config} differs from the config file; "
                  f"using the config file.")
        start_episode = checkpoint.training_state.episodes_done
        agent = DQNAgent(config.train, rng=agent_rng(run.master_seed, start_episode), params=checkpoint.params)
        agent.restore(checkpoint.training_state)
        print(f"[Checkpoint] Resumed {resume} after episode {start_episode} (eps={agent.eps:.4f})")
        dropped = truncate_metrics(metrics_path, start_episode)
        if dropped:
            print(f"[Train] Dropped {dropped} metrics rows written after the checkpoint")
    else:
        agent = DQNAgent(config.train, rng=agent_rng(run.master_seed, 0))
        if metrics_path.exists():
            metrics_path.unlink()
    save_config(config, out / CONFIG_NAME)

    print(f"[Train] {BANNER}")
    print(f"[Train] Episodes {start_episode}..{run.episodes - 1}, master seed {run.master_seed}, "
          f"filter {'on' if run.filter_on else 'off'}")
    print(f"[Train] Outputs in {out}")
    print(f"[Train] {BANNER}")

    result = TrainingResult(checkpoint_path=checkpoint_path, metrics_path=metrics_path)
    episodes = range(start_episode, run.episodes)
    for index in tqdm(episodes, desc="Training episodes", disable=quiet):
        metrics, _ = run_episode(
            episode_seed(run.master_seed, index),
            agent,
            EpisodeMode.TRAIN,
            run.filter_on,
            config,
            episode_index=index,
            trace_path=trace_file(trace_dir, "train", index) if run.write_trace else None,
        )
        append_metrics(metrics_path, [metrics])
        result.episodes.append(metrics)
        if not quiet:
            tqdm.write(f"[Episode] {metrics.summary()}")

        done = index + 1
        if done % run.checkpoint_every == 0 or done == run.episodes:
            save_checkpoint(checkpoint_path, agent.params, config.train, agent.training_state(done))
            if not quiet:
                tqdm.write(f"[Checkpoint] Saved {checkpoint_path} after episode {index}")

    if not episodes:
        print(f"[Train] Nothing to train: checkpoint already covers {start_episode} episodes.")
        save_checkpoint(checkpoint_path, agent.params, config.train, agent.training_state(start_episode))

    print(f"[Train] Finished: {agent.grad_steps} gradient steps, {agent.decision_steps} decisions, "
          f"eps={agent.eps:.4f}")

    if run.eval_episodes > 0:
        result.evaluation = evaluate(
            # The float32 parameters an eval of the checkpoint file sees.
            load_checkpoint(checkpoint_path).params,
            run.eval_episodes,
            run.filter_on,
            config,
            workers=run.workers,
            metrics_path=metrics_path,
            trace_dir=trace_dir if run.write_trace else None,
            quiet=quiet,
        )
    return result


def _load_params(checkpoint: NetworkParams | Checkpoint | str | Path) -> NetworkParams:
    if isinstance(checkpoint, NetworkParams):
        return checkpoint
    if isinstance(checkpoint, Checkpoint):
        return checkpoint.params
    return load_checkpoint(checkpoint).params


def _evaluate_one(job: Tuple[NetworkParams, ExperimentConfig, int, bool, Optional[Path]]) -> EpisodeMetrics:
    params, config, index, filter_on, trace_dir = job
    # Greedy actions never touch the generator.
    agent = DQNAgent(config.train, rng=np.random.default_rng(0), params=params)
    metrics, _ = run_episode(
        eval_episode_seed(config.run.master_seed, index),
        agent,
        EpisodeMode.EVAL,
        filter_on,
        config,
        episode_index=index,
        trace_path=trace_file(trace_dir, "eval", index) if trace_dir is not None else None,
    )
    return metrics


def evaluate(
    checkpoint: NetworkParams | Checkpoint | str | Path,
    n_episodes: int,
    filter_on: bool,
    config: Optional[ExperimentConfig] = None,
    *,
    workers: int = 1,
    metrics_path: Optional[str | Path] = None,
    trace_dir: Optional[str | Path] = None,
    quiet: bool = False,
) -> EvaluationResult:
    """Run ``n_episodes`` greedy episodes on evaluation seeds and summarise them.

    Episodes can fan out over ``workers`` processes; results are ordered by
    episode index either way, so the summary does not depend on ``workers``.
    """
    if n_episodes <= 0:
        raise EvaluationError(f"Need at least one evaluation episode, got {n_episodes}.")
    if workers < 1:
        raise EvaluationError(f"workers must be at least 1, got {workers}.")
    config = config if config is not None else ExperimentConfig()
    params = _load_params(checkpoint)
    method = method_name(filter_on)
    traces = Path(trace_dir) if trace_dir is not None else None

    jobs = [(params, config, index, filter_on, traces) for index in range(n_episodes)]
    if workers == 1:
        episodes = [_evaluate_one(job) for job in tqdm(jobs, desc=f"Evaluating {method}", disable=quiet)]
    else:
        with Pool(processes=min(workers, n_episodes)) as pool:
            episodes = list(tqdm(
                pool.imap(_evaluate_one, jobs),
                total=n_episodes,
                desc=f"Evaluating {method}",
                disable=quiet,
            ))

    if metrics_path is not None:
        append_metrics(metrics_path, episodes)
    if not quiet:
        for metrics in episodes:
            print(f"[Eval] {metrics.summary()}")

    summary = RunSummaryCalculator().calculate(episodes, method=method)
    print(f"[Eval] {summary.summary()}")
    return EvaluationResult(summary=summary, episodes=episodes)


def compare_methods(
    checkpoint: NetworkParams | Checkpoint | str | Path,
    n_episodes: int,
    config: Optional[ExperimentConfig] = None,
    *,
    workers: int = 1,
    trace_dir: Optional[str | Path] = None,
    quiet: bool = False,
) -> List[RunSummary]:
    """Evaluate the same parameters without and with the safety filter on matched seeds."""
    params = _load_params(checkpoint)
    summaries: List[RunSummary] = []
    for filter_on in (False, True):
        method_traces = Path(trace_dir) / method_name(filter_on) if trace_dir is not None else None
        result = evaluate(params, n_episodes, filter_on, config, workers=workers,
                          trace_dir=method_traces, quiet=quiet)
        summaries.append(result.summary)
    print_results_table(summaries)
    return summaries


def print_results_table(summaries: Sequence[RunSummary]) -> None:
    print(f"[Eval] {BANNER}")
    for line in format_results_table(summaries):
        print(f"[Eval] {line}")
    print(f"[Eval] {BANNER}")
