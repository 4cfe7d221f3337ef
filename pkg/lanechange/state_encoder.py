"""Occupancy-grid encoding of the traffic around the ego.

The grid has one row per 2 m slice of road from 60 m ahead (row 0) down to
30 m behind the ego (row 44) and one column per lane, leftmost first. Every
row a car's body touches holds that car's normalised speed, positive for the
ego and negative for everyone else; empty cells hold exactly 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sim.world import EGO_INDEX, TrackConfig, WorldState

GRID_ROWS = 45
AUX_SIZE = 3
EMPTY_CELL = 1.0
SPEED_FLOOR = 0.01
SPEED_CEIL = 0.99


class EncoderError(Exception):
    """Raised for an inconsistent encoder configuration."""


@dataclass
class EncoderConfig:
    range_ahead: float = 60.0
    range_behind: float = 30.0
    row_span: float = 2.0
    v_floor: float = 0.0
    # None means the track speed limit.
    v_ceil: Optional[float] = None

    def validate(self) -> None:
        rows = (self.range_ahead + self.range_behind) / self.row_span
        if self.row_span <= 0 or abs(rows - GRID_ROWS) > 1e-9:
            raise EncoderError(
                f"range_ahead + range_behind must span exactly {GRID_ROWS} rows of row_span; got {rows:g}."
            )

    def speed_bounds(self, track: TrackConfig) -> tuple[float, float]:
        return self.v_floor, track.speed_limit if self.v_ceil is None else self.v_ceil


@dataclass(eq=False)
class StateTensor:
    grid: np.ndarray
    aux: np.ndarray

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.aux = np.asarray(self.aux, dtype=float)


def normalize_speed(v: float, v_min: float, v_max: float) -> float:
    """Linear map onto [0.01, 0.99] so an occupied cell never reads as empty."""
    if v_max == v_min:
        return 0.5
    if v_max < v_min:
        raise EncoderError(f"v_max ({v_max}) must not be below v_min ({v_min}).")
    return float(np.clip((v - v_min) / (v_max - v_min), SPEED_FLOOR, SPEED_CEIL))


def occupied_rows(relative_s: float, half_length: float, cfg: EncoderConfig) -> range:
    """Rows whose span has a non-empty intersection with the body."""
    front = relative_s + half_length
    rear = relative_s - half_length
    # Row r covers (range_ahead - span*(r+1), range_ahead - span*r).
    first = int(np.floor((cfg.range_ahead - front) / cfg.row_span))
    last = int(np.ceil((cfg.range_ahead - rear) / cfg.row_span)) - 1
    return range(max(first, 0), min(last, GRID_ROWS - 1) + 1)


def encode(world: WorldState, cfg: EncoderConfig, track: TrackConfig) -> StateTensor:
    lap = track.lap_length
    v_min, v_max = cfg.speed_bounds(track)
    grid = np.full((GRID_ROWS, track.lane_count), EMPTY_CELL)

    ego_s = world.s[EGO_INDEX]
    relative = np.mod(world.s - ego_s + lap / 2.0, lap) - lap / 2.0
    in_range = (relative >= -cfg.range_behind) & (relative <= cfg.range_ahead)

    for index in np.flatnonzero(in_range):
        sign = 1.0 if index == EGO_INDEX else -1.0
        value = sign * normalize_speed(float(world.speed[index]), v_min, v_max)
        rows = occupied_rows(float(relative[index]), float(world.length[index]) / 2.0, cfg)
        grid[rows.start:rows.stop, int(world.lane[index])] = value

    ego_lane = world.ego_lane
    aux = np.array([
        normalize_speed(world.ego_speed, v_min, v_max),
        1.0 if ego_lane > 0 else 0.0,
        1.0 if ego_lane < track.lane_count - 1 else 0.0,
    ])
    return StateTensor(grid=grid, aux=aux)
