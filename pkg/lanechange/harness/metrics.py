"""Episode metrics, the metrics CSV and run summaries."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import pandas as pd

METRICS_COLUMNS = [
    "episode",
    "phase",
    "lane_changes",
    "collisions",
    "avg_speed_mph",
    "distance_m",
    "return",
    "eps",
]
INTEGER_COLUMNS = ("episode", "lane_changes", "collisions")
FLOAT_COLUMNS = ("avg_speed_mph", "distance_m", "return", "eps")
PHASES = ("train", "eval")
FLOAT_FORMAT = "%.6f"

METHOD_PLAIN = "dqn"
METHOD_FILTERED = "rule_based_dqn"


class MetricsLoadError(Exception):
    """Raised when a metrics CSV cannot be read or contains a malformed row."""


class SummaryError(Exception):
    """Raised when a run summary has no episodes to summarise."""


@dataclass
class EpisodeMetrics:
    episode_index: int
    phase: str
    lane_changes: int
    collisions: int
    avg_speed: float  # MPH
    distance: float  # metres
    discounted_return: float
    wall_steps: int
    eps_at_end: float

    def to_row(self) -> Dict[str, object]:
        return {
            "episode": self.episode_index,
            "phase": self.phase,
            "lane_changes": self.lane_changes,
            "collisions": self.collisions,
            "avg_speed_mph": self.avg_speed,
            "distance_m": self.distance,
            "return": self.discounted_return,
            "eps": self.eps_at_end,
        }

    def summary(self) -> str:
        return (
            f"{self.phase} episode {self.episode_index}: {self.lane_changes} lane changes, "
            f"{'CRASH' if self.collisions else 'no crash'}, {self.avg_speed:.1f} MPH over "
            f"{self.distance:.0f} m, G={self.discounted_return:.3f}, eps={self.eps_at_end:.4f}"
        )


def append_metrics(path: str | Path, metrics: Iterable[EpisodeMetrics]) -> Path:
    """Append rows, writing the header only when the file is new.

    Each call writes and closes the file so completed episodes survive a crash.
    """
    csv_path = Path(path)
    rows = [m.to_row() for m in metrics]
    if not rows:
        return csv_path
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_header = not csv_path.exists() or csv_path.stat().st_size == 0
    pd.DataFrame(rows, columns=METRICS_COLUMNS).to_csv(
        csv_path,
        mode="a",
        header=write_header,
        index=False,
        float_format=FLOAT_FORMAT,
        lineterminator="\n",
    )
    return csv_path


@dataclass
class MetricsLoadResult:
    dataframe: pd.DataFrame
    source_path: Path

    def phase(self, name: str) -> pd.DataFrame:
        return self.dataframe[self.dataframe["phase"] == name].reset_index(drop=True)


class MetricsLoader:
    """Load a metrics CSV and check every row against the column schema."""

    def load(self, path: str | Path) -> MetricsLoadResult:
        file_path = Path(path)
        if not file_path.exists():
            raise MetricsLoadError(f"File not found: {file_path}")

        try:
            df = pd.read_csv(file_path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError:
            raise MetricsLoadError(f"{file_path} is empty (no header line).") from None
        except pd.errors.ParserError as exc:
            raise MetricsLoadError(f"{file_path}: {exc}") from exc

        if list(df.columns) != METRICS_COLUMNS:
            raise MetricsLoadError(
                f"{file_path}: header must be {','.join(METRICS_COLUMNS)}, got {','.join(df.columns)}."
            )

        for position, values in enumerate(df.itertuples(index=False, name=None)):
            self._check_row(dict(zip(METRICS_COLUMNS, values)), line=position + 2, source=file_path)

        for column in INTEGER_COLUMNS:
            df[column] = df[column].astype(int)
        for column in FLOAT_COLUMNS:
            df[column] = df[column].astype(float)
        return MetricsLoadResult(dataframe=df, source_path=file_path)

    def _check_row(self, row: Dict[str, object], *, line: int, source: Path) -> None:
        for column in METRICS_COLUMNS:
            value = row[column]
            if not isinstance(value, str) or not value.strip():
                raise MetricsLoadError(f"{source}: line {line}: missing value for {column}.")
        if row["phase"] not in PHASES:
            raise MetricsLoadError(f"{source}: line {line}: phase must be train or eval, got '{row['phase']}'.")
        for column in INTEGER_COLUMNS:
            try:
                int(row[column])
            except ValueError:
                raise MetricsLoadError(
                    f"{source}: line {line}: {column} must be an integer, got '{row[column]}'."
                ) from None
        for column in FLOAT_COLUMNS:
            try:
                float(row[column])
            except ValueError:
                raise MetricsLoadError(
                    f"{source}: line {line}: {column} must be a number, got '{row[column]}'."
                ) from None


def truncate_metrics(path: str | Path, episodes_done: int) -> int:
    """Keep only training rows for episodes below ``episodes_done``.

    Rows written after the last checkpoint, and any evaluation rows, are
    dropped so a resumed run can append without repeating episodes. Returns
    the number of rows removed.
    """
    csv_path = Path(path)
    if not csv_path.exists() or csv_path.stat().st_size == 0:
        return 0
    df = MetricsLoader().load(csv_path).dataframe
    kept = df[(df["phase"] == "train") & (df["episode"] < episodes_done)]
    dropped = len(df) - len(kept)
    if dropped:
        kept.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return dropped


@dataclass
class RunSummary:
    method: str
    episodes: int
    avg_speed: float  # MPH
    avg_lane_changes: float
    safety_rate: float

    def summary(self) -> str:
        return (
            f"{self.method}: safety rate {self.safety_rate:.2f}, {self.avg_speed:.1f} MPH, "
            f"{self.avg_lane_changes:.2f} lane changes over {self.episodes} episodes"
        )


class RunSummaryCalculator:
    """Reduce evaluation episodes to the method-level comparison numbers."""

    def calculate(self, metrics: Sequence[EpisodeMetrics], *, method: str) -> RunSummary:
        if not metrics:
            raise SummaryError("No episodes to summarise; the safety rate is undefined.")
        crashed = sum(1 for m in metrics if m.collisions > 0)
        count = len(metrics)
        return RunSummary(
            method=method,
            episodes=count,
            avg_speed=sum(m.avg_speed for m in metrics) / count,
            avg_lane_changes=sum(m.lane_changes for m in metrics) / count,
            safety_rate=1.0 - crashed / count,
        )


def method_name(filter_on: bool) -> str:
    return METHOD_FILTERED if filter_on else METHOD_PLAIN


def format_results_table(summaries: Sequence[RunSummary]) -> List[str]:
    header = f"{'Method':<16} {'Avg speed (MPH)':>16} {'Lane changes':>13} {'Safety rate':>12}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(f"{s.method:<16} {s.avg_speed:>16.2f} {s.avg_lane_changes:>13.2f} {s.safety_rate:>12.2f}")
    return lines
