import pandas as pd

from lanechange.harness import EpisodeMetrics, PlotOptions, emit_plot_data
from lanechange.harness.metrics import METRICS_COLUMNS, append_metrics
from lanechange.harness.plotting import FIGURE_NAME


def rows(count, phase):
    return [
        EpisodeMetrics(i, phase, i % 3, 0, 40.0, 500.0, 1.0, 100, 0.0)
        for i in range(count)
    ]


def test_train_only_metrics(tmp_path):
    csv = append_metrics(tmp_path / "metrics.csv", rows(10, "train"))
    result = emit_plot_data(csv, tmp_path / "plots")
    train = pd.read_csv(result.series_paths["train"])
    assert list(train.columns) == ["episode", "lane_changes"]
    assert len(train) == 10
    assert train["lane_changes"].tolist() == [i % 3 for i in range(10)]
    assert len(pd.read_csv(result.series_paths["eval"])) == 0
    assert result.figure_path == tmp_path / "plots" / FIGURE_NAME
    assert result.figure_path.stat().st_size > 0


def test_both_phases_with_smoothing(tmp_path):
    csv = append_metrics(tmp_path / "metrics.csv", rows(6, "train") + rows(4, "eval"))
    result = emit_plot_data(csv, tmp_path, options=PlotOptions(apply_smoothing=True, smoothing_window=4))
    assert len(result.series["train"]) == 6
    assert len(result.series["eval"]) == 4
    assert result.figure_path.exists()


def test_header_only_warns(tmp_path, capsys):
    csv = tmp_path / "metrics.csv"
    csv.write_text(",".join(METRICS_COLUMNS) + "\n")
    result = emit_plot_data(csv, tmp_path / "out", render_figure=False)
    assert "Warning" in capsys.readouterr().out
    assert all(frame.empty for frame in result.series.values())
    assert result.figure_path is None
    assert result.series_paths["train"].read_text().strip() == "episode,lane_changes"
