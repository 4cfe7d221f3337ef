import numpy as np
import pytest

from conftest import build_world
from lanechange.sim import (
    SimConfig,
    TrackConfig,
    WorldConfigError,
    detect_collision,
    plan_lane_change,
    spawn_world,
    start_maneuver,
    step,
)

TRACK = TrackConfig()


def test_spawn_is_deterministic():
    a = spawn_world(TRACK, SimConfig(), 7)
    b = spawn_world(TRACK, SimConfig(), 7)
    assert a.identical_to(b)
    assert not a.identical_to(spawn_world(TRACK, SimConfig(), 8))


def test_spawn_without_traffic():
    world = spawn_world(TRACK, SimConfig(npc_count=0), 0)
    assert world.vehicle_count == 1
    assert (world.ego_s, world.ego_lane, world.ego_speed) == (0.0, 1, 0.0)
    assert world.ego.is_ego


def test_spawn_rejects_overfull_track():
    with pytest.raises(WorldConfigError):
        spawn_world(TRACK, SimConfig(npc_count=1017, spawn_window=0.0), 0)


def test_spawn_rejects_bad_seed():
    with pytest.raises(WorldConfigError):
        spawn_world(TRACK, SimConfig(), -1)


@pytest.mark.parametrize("seed", range(20))
def test_spawn_layout(seed):
    sim = SimConfig()
    world = spawn_world(TRACK, sim, seed)
    assert world.vehicle_count == sim.npc_count + 1
    assert world.ids[0] == 0 and world.ego_lane == TRACK.middle_lane and world.ego_s == 0.0
    npc_speeds = world.speed[1:]
    assert np.all((npc_speeds >= sim.npc_speed_min) & (npc_speeds <= sim.npc_speed_max))
    assert np.allclose(world.d, TRACK.lane_center(world.lane))
    assert detect_collision(world) is None
    for lane in range(TRACK.lane_count):
        s = np.sort(world.s[world.lane == lane])
        if s.size < 2:
            continue
        gaps = np.diff(np.append(s, s[0] + TRACK.lap_length)) - sim.vehicle_length
        assert gaps.min() >= sim.min_spawn_gap - 1e-9



def test_spawn_window_bounds_npc_positions():
    windowed = [spawn_world(TRACK, SimConfig(), seed) for seed in range(10)]
    assert all(world.s[1:].max() <= SimConfig().spawn_window for world in windowed)

    spread = [spawn_world(TRACK, SimConfig(spawn_window=0.0), seed) for seed in range(10)]
    assert max(world.s[1:].max() for world in spread) > 2 * SimConfig().spawn_window

def test_step_moves_with_previous_speed():
    world, _ = step(build_world([(100.0, 1, 5.0)]), 1.0)
    assert world.ego_s == 105.0
    assert world.time == 1.0
    assert world.ego_odometer == 5.0


def test_wrap_reports_lap():
    world, events = step(build_world([(TRACK.lap_length - 1.0, 1, 2.0)]), 1.0)
    assert world.ego_s == pytest.approx(1.0)
    assert events.lap_completed


def test_overlap_is_a_collision():
    world, events = step(build_world([(100.0, 1, 0.0), (103.0, 1, 0.0)]), 0.1)
    assert events.collision
    assert events.collision_ids == (0, 1)


def test_collision_geometry():
    assert detect_collision(build_world([(100.0, 1, 0.0), (125.5, 1, 0.0)])) is None
    assert detect_collision(build_world([(100.0, 1, 0.0), (100.0, 0, 0.0)])) is None
    assert detect_collision(build_world([(100.0, 1, 0.0), (100.0, 1, 0.0)])) == (0, 1)
    # Across the seam of the loop.
    assert detect_collision(build_world([(1.0, 1, 0.0), (TRACK.lap_length - 2.0, 1, 0.0)])) == (0, 1)


def test_step_does_not_mutate_input():
    world = spawn_world(TRACK, SimConfig(), 3)
    before = world.copy()
    step(world, 0.1)
    assert world.identical_to(before)


def test_lane_change_completes_and_snaps():
    world = build_world([(0.0, 1, 20.0)])
    world = start_maneuver(world, plan_lane_change(world, 2))
    completed = False
    for _ in range(29):
        world, events = step(world, 0.1)
        completed = completed or events.lane_change_completed
    assert completed
    assert world.ego_lane == 2
    assert world.active_maneuver is None
    assert world.d[0] == pytest.approx(10.0)
    # Speed is held while the maneuver runs.
    assert world.ego_speed == 20.0


def test_npcs_keep_their_lane():
    world = spawn_world(TRACK, SimConfig(), 5)
    d0 = world.d[1:].copy()
    for _ in range(200):
        world, _ = step(world, 0.1)
    assert np.array_equal(world.d[1:], d0)


def test_no_collisions_without_lane_changes():
    sim = SimConfig()
    for seed in range(100):
        world = spawn_world(TRACK, sim, seed)
        for _ in range(1000):
            world, events = step(world, sim.dt)
            assert not events.collision, f"seed {seed} at t={world.time:.1f}"
