import numpy as np
import pytest

from conftest import build_world
from lanechange.sim import SimConfig, TrackConfig, spawn_world
from lanechange.state_encoder import (
    EMPTY_CELL,
    GRID_ROWS,
    EncoderConfig,
    EncoderError,
    encode,
    normalize_speed,
    occupied_rows,
)

CFG = EncoderConfig()
TRACK = TrackConfig()
HALF = 2.75


def expected_rows(relative_s):
    """Rows whose open span overlaps the body, by direct interval test."""
    rows = []
    for r in range(GRID_ROWS):
        top = CFG.range_ahead - CFG.row_span * r
        bottom = top - CFG.row_span
        if max(bottom, relative_s - HALF) < min(top, relative_s + HALF):
            rows.append(r)
    return rows


def test_ego_alone():
    state = encode(build_world([(500.0, 1, 0.0)]), CFG, TRACK)
    assert state.grid.shape == (45, 3)
    occupied = np.argwhere(state.grid != EMPTY_CELL)
    assert sorted(occupied[:, 0]) == expected_rows(0.0) == [28, 29, 30, 31]
    assert set(occupied[:, 1]) == {1}
    assert np.all(state.grid[28:32, 1] == pytest.approx(0.01))
    assert state.aux.tolist() == pytest.approx([0.01, 1.0, 1.0])


@pytest.mark.parametrize("relative, count", [(20.0, 4), (20.25, 4), (18.75, 3)])
def test_cells_per_car(relative, count):
    rows = occupied_rows(relative, HALF, CFG)
    assert list(rows) == expected_rows(relative)
    assert len(rows) == count


def test_far_car_is_ignored():
    state = encode(build_world([(0.0, 1, 10.0), (61.0, 1, 10.0)]), CFG, TRACK)
    assert np.count_nonzero(state.grid != EMPTY_CELL) == 4


def test_npc_cells_are_negative_and_ego_positive():
    state = encode(build_world([(100.0, 1, 22.352), (120.0, 0, 11.176)]), CFG, TRACK)
    npc_rows = expected_rows(20.0)
    assert np.all(state.grid[npc_rows, 0] == pytest.approx(-0.5))
    assert np.all(state.grid[28:32, 1] == pytest.approx(0.99))


def test_lane_flags_at_edges():
    assert encode(build_world([(0.0, 0, 5.0)]), CFG, TRACK).aux[1:].tolist() == [0.0, 1.0]
    assert encode(build_world([(0.0, 2, 5.0)]), CFG, TRACK).aux[1:].tolist() == [1.0, 0.0]


def test_normalize_speed():
    assert normalize_speed(0.0, 0.0, 20.0) == 0.01
    assert normalize_speed(10.0, 0.0, 20.0) == 0.5
    assert normalize_speed(30.0, 0.0, 20.0) == 0.99
    assert normalize_speed(7.0, 5.0, 5.0) == 0.5
    with pytest.raises(EncoderError):
        normalize_speed(1.0, 5.0, 1.0)


def test_config_must_span_45_rows():
    with pytest.raises(EncoderError):
        EncoderConfig(range_ahead=70.0).validate()


def test_random_worlds():
    sim = SimConfig(npc_count=24, spawn_window=200.0)
    for seed in range(10_000):
        world = spawn_world(TRACK, sim, seed)
        state = encode(world, CFG, TRACK)
        grid = state.grid
        assert np.all((grid >= -1.0) & (grid <= 1.0))
        assert 0.0 < state.aux[0] < 1.0

        relative = np.mod(world.s - world.ego_s + TRACK.lap_length / 2, TRACK.lap_length) - TRACK.lap_length / 2
        mask = np.zeros_like(grid, dtype=bool)
        for i in np.flatnonzero((relative >= -30.0) & (relative <= 60.0)):
            rows = expected_rows(relative[i])
            mask[rows, world.lane[i]] = True
            if -30.0 + HALF <= relative[i] <= 60.0 - HALF:
                assert len(rows) in (3, 4)
        assert np.array_equal(grid == EMPTY_CELL, ~mask)


def test_translation_invariance():
    sim = SimConfig(npc_count=24, spawn_window=200.0)
    for seed in range(200):
        world = spawn_world(TRACK, sim, seed)
        shifted = world.copy()
        shifted.s = np.mod(world.s + 1234.5, TRACK.lap_length)
        assert np.array_equal(encode(world, CFG, TRACK).grid, encode(shifted, CFG, TRACK).grid)
