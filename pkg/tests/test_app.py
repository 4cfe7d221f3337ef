import pandas as pd

from lanechange import main
from lanechange.harness.training import CHECKPOINT_NAME, METRICS_NAME

SMALL_CONFIG = """\
sim.npc_count = 4
sim.spawn_window = 300
sim.max_episode_time = 10
train.batch_size = 4
train.buffer_capacity = 50
run.checkpoint_every = 1
run.eval_episodes = 1
"""


def test_train_eval_plot(tmp_path, capsys):
    config = tmp_path / "small.cfg"
    config.write_text(SMALL_CONFIG)
    out = tmp_path / "run"

    assert main(["train", "--config", str(config), "--out", str(out), "--episodes", "2", "--quiet"]) == 0
    frame = pd.read_csv(out / METRICS_NAME)
    assert frame["phase"].tolist() == ["train", "train", "eval"]

    checkpoint = out / CHECKPOINT_NAME
    assert main(["eval", "--checkpoint", str(checkpoint), "--episodes", "2", "--compare", "--quiet"]) == 0
    assert "rule_based_dqn" in capsys.readouterr().out

    assert main(["plot", "--metrics", str(out / METRICS_NAME), "--out", str(tmp_path / "plots"), "--no-figure"]) == 0
    assert len(pd.read_csv(tmp_path / "plots" / "lane_changes_train.csv")) == 2


def test_handled_errors_return_one(tmp_path, capsys):
    assert main(["plot", "--metrics", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    assert "[Error]" in capsys.readouterr().out
    assert main(["eval", "--checkpoint", str(tmp_path / "none.lcdqn"), "--episodes", "1"]) == 1


def test_bad_config_is_reported(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("train.gamma = 2\n")
    assert main(["train", "--config", str(config), "--out", str(tmp_path / "o")]) == 1
    assert "gamma" in capsys.readouterr().out
