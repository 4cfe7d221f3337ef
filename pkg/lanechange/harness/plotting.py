"""Lane-change frequency series and figure from a metrics CSV.

Writes one delimited series file per phase (``lane_changes_train.csv`` and
``lane_changes_eval.csv``) plus ``lane_changes.png`` with both phases on one
axis, evaluation episodes following the training ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Optional

import pandas as pd
from matplotlib.figure import Figure

from .metrics import PHASES, MetricsLoader

if TYPE_CHECKING:
    import matplotlib.axes

SERIES_COLUMNS = ["episode", "lane_changes"]
FIGURE_NAME = "lane_changes.png"


class PlotOptions:
    """Configuration options for the lane-change figure."""

    def __init__(
        self,
        *,
        show_grid: bool = True,
        apply_smoothing: bool = False,
        smoothing_window: int = 5,
        show_legend: bool = True,
        legend_position: str = "Upper Right",
        legend_fontsize: int = 8,
        graph_title: str = "Frequency of Lane Changes",
        x_label: str = "Episode",
        y_label: str = "Lane changes",
        dpi: int = 120,
    ):
        """Initialize plot options.

        Args:
            show_grid: Whether to show grid lines
            apply_smoothing: Whether to overlay a moving average
            smoothing_window: Window size for smoothing (made odd)
            show_legend: Whether to show legend
            legend_position: Legend position name
            legend_fontsize: Legend font size in points
            graph_title: Graph title text
            x_label: X-axis label
            y_label: Y-axis label
            dpi: Resolution of the saved image
        """
        self.show_grid = show_grid
        self.apply_smoothing = apply_smoothing
        self.smoothing_window = smoothing_window
        self.show_legend = show_legend
        self.legend_position = legend_position
        self.legend_fontsize = legend_fontsize
        self.graph_title = graph_title
        self.x_label = x_label
        self.y_label = y_label
        self.dpi = dpi


@dataclass
class PlotDataResult:
    series_paths: Dict[str, Path]
    series: Dict[str, pd.DataFrame]
    figure_path: Optional[Path]


def emit_plot_data(
    metrics_csv: str | Path,
    out_dir: str | Path,
    *,
    options: Optional[PlotOptions] = None,
    render_figure: bool = True,
) -> PlotDataResult:
    """Split the metrics CSV into per-phase (episode, lane_changes) series files."""
    loaded = MetricsLoader().load(metrics_csv)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if loaded.dataframe.empty:
        print(f"[Plot] Warning: {loaded.source_path} has no episodes; writing empty series.")

    series: Dict[str, pd.DataFrame] = {}
    paths: Dict[str, Path] = {}
    for phase in PHASES:
        frame = loaded.phase(phase)[SERIES_COLUMNS]
        path = out / f"lane_changes_{phase}.csv"
        frame.to_csv(path, index=False, lineterminator="\n")
        series[phase] = frame
        paths[phase] = path
        print(f"[Plot] Wrote {len(frame)} {phase} points to {path}")

    figure_path = None
    if render_figure:
        figure_path = LaneChangePlotter(options or PlotOptions()).save(series, out / FIGURE_NAME)
    return PlotDataResult(series_paths=paths, series=series, figure_path=figure_path)


class LaneChangePlotter:
    """Draws training and evaluation lane-change counts on one axis."""

    POSITIONS = {
        "Upper Left": "upper left",
        "Upper Right": "upper right",
        "Lower Left": "lower left",
        "Lower Right": "lower right",
        "Best": "best",
    }

    def __init__(self, options: PlotOptions) -> None:
        self.options = options

    def save(self, series: Dict[str, pd.DataFrame], path: Path) -> Path:
        fig = Figure(figsize=(8, 4.5))
        ax = fig.add_subplot(111)

        offset = 0
        for phase in PHASES:
            frame = series.get(phase)
            if frame is None or frame.empty:
                continue
            # Evaluation episodes restart at 0; draw them after the training ones.
            x = frame["episode"] - frame["episode"].min() + offset
            self._plot_series(ax, x, frame["lane_changes"], phase)
            offset = int(x.max()) + 1

        ax.set_xlabel(self.options.x_label)
        ax.set_ylabel(self.options.y_label)
        if self.options.show_grid:
            ax.grid(True, which="both", linestyle=":")
        if self.options.show_legend and ax.get_legend_handles_labels()[0]:
            ax.legend(
                loc=self.POSITIONS.get(self.options.legend_position, "upper right"),
                fontsize=self.options.legend_fontsize,
            )
        fig.suptitle(self.options.graph_title)
        fig.tight_layout()
        fig.savefig(path, dpi=self.options.dpi)
        print(f"[Plot] Saved figure to {path}")
        return path

    def _plot_series(self, ax: matplotlib.axes.Axes, x: pd.Series, y: pd.Series, phase: str) -> None:
        label = "Training" if phase == "train" else "Testing"
        ax.plot(x, y, marker="o", markersize=3, linewidth=1, label=label)

        if self.options.apply_smoothing and len(y) > 1:
            window = self.options.smoothing_window
            if window % 2 == 0:
                window += 1
            smoothed = y.astype(float).rolling(window, min_periods=1, center=True).mean()
            ax.plot(x, smoothed, linestyle="--", linewidth=1.5, label=f"{label} (moving avg {window})")
            print(f"[Plot] Applied smoothing with window={window} to {phase}")
