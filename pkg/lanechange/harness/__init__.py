"""Experiment harness.

- episode: one closed-loop episode and per-episode seeds
- training: training loop, evaluation and method comparison
- metrics: episode metrics, the metrics CSV and run summaries
- plotting: lane-change frequency series and figure
"""

from .episode import EpisodeMode, episode_seed, eval_episode_seed, run_episode
from .metrics import EpisodeMetrics, MetricsLoadError, MetricsLoader, RunSummary, RunSummaryCalculator
from .plotting import PlotOptions, emit_plot_data
from .training import EvaluationError, TrainingError, compare_methods, evaluate, train

__all__ = [
    "EpisodeMode",
    "episode_seed",
    "eval_episode_seed",
    "run_episode",
    "EpisodeMetrics",
    "MetricsLoadError",
    "MetricsLoader",
    "RunSummary",
    "RunSummaryCalculator",
    "PlotOptions",
    "emit_plot_data",
    "EvaluationError",
    "TrainingError",
    "compare_methods",
    "evaluate",
    "train",
]
