from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np
import pytest

from lanechange.agent import TrainConfig
from lanechange.settings import ExperimentConfig, RunConfig
from lanechange.sim import SimConfig, TrackConfig, WorldState


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def build_world(
    vehicles: Sequence[Tuple[float, int, float]],
    *,
    track: TrackConfig | None = None,
    sim: SimConfig | None = None,
) -> WorldState:
    """World from (s, lane, speed) triples; the first one is the ego."""
    track = track or TrackConfig()
    sim = sim or SimConfig(npc_count=max(len(vehicles) - 1, 0))
    count = len(vehicles)
    s = np.array([v[0] for v in vehicles], dtype=float)
    lanes = np.array([v[1] for v in vehicles], dtype=int)
    speeds = np.array([v[2] for v in vehicles], dtype=float)
    cruise = speeds.copy()
    cruise[0] = track.speed_limit
    return WorldState(
        track=track,
        sim=sim,
        time=0.0,
        ids=np.arange(count),
        s=np.mod(s, track.lap_length),
        d=np.asarray(track.lane_center(lanes), dtype=float),
        lane=lanes,
        speed=speeds,
        length=np.full(count, sim.vehicle_length),
        cruise_speed=cruise,
    )


@pytest.fixture
def small_config() -> ExperimentConfig:
    """Short episodes and a tiny replay buffer so harness tests stay fast."""
    config = ExperimentConfig(
        sim=SimConfig(npc_count=6, spawn_window=300.0, max_episode_time=20.0),
        train=TrainConfig(batch_size=8, buffer_capacity=200, target_sync_every=5),
        run=RunConfig(episodes=2, checkpoint_every=1, eval_episodes=0),
    )
    config.validate()
    return config
