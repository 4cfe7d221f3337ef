"""Full-size training run; takes tens of minutes, so only with --runslow."""

import pytest

from lanechange.config import ms_to_mph
from lanechange.harness import compare_methods, train
from lanechange.settings import ExperimentConfig


@pytest.mark.slow
def test_filter_improves_safety_and_lane_changes_settle(tmp_path):
    config = ExperimentConfig()
    config.run.episodes = 100
    config.run.eval_episodes = 10
    result = train(config, tmp_path, quiet=True)

    plain, filtered = compare_methods(result.checkpoint_path, 10, config, quiet=True)
    assert filtered.safety_rate >= plain.safety_rate + 0.2
    assert filtered.avg_lane_changes < plain.avg_lane_changes
    assert filtered.avg_speed >= 0.8 * ms_to_mph(config.track.speed_limit)

    early = sum(m.lane_changes for m in result.episodes[:10]) / 10
    late = result.evaluation.summary.avg_lane_changes
    assert early >= 3 * late
