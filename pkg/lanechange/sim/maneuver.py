"""Lane-change trajectory generation.

The lateral offset follows a jerk-minimising quintic polynomial with zero
lateral velocity and acceleration at both ends. For a shift D over duration T
the peak lateral acceleration is (10 / sqrt(3)) * D / T^2 and the peak jerk is
60 * D / T^3 (reached at the endpoints), which gives the shortest admissible
duration in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial import polynomial as P

from ..config import MAX_ACCEL_MS2, MAX_JERK_MS3

if TYPE_CHECKING:
    from .world import WorldState


PEAK_ACCEL_FACTOR = 10.0 / math.sqrt(3.0)
PEAK_JERK_FACTOR = 60.0
DURATION_RESOLUTION_S = 0.1


class ManeuverError(Exception):
    """Raised when a lane change cannot be planned."""


@dataclass(frozen=True)
class ManeuverPlan:
    """Lateral profile d(t) for one ego lane change.

    ``coefficients`` are the quintic's a0..a5 in elapsed time since
    ``start_time``; the profile is held at its end value after ``duration``.
    """

    start_time: float
    duration: float
    source_lane: int
    target_lane: int
    coefficients: np.ndarray

    @property
    def is_lane_change(self) -> bool:
        return self.source_lane != self.target_lane

    def _clamp(self, elapsed: float | np.ndarray) -> float | np.ndarray:
        return np.clip(elapsed, 0.0, self.duration)

    def lateral_position(self, elapsed: float | np.ndarray) -> float | np.ndarray:
        return P.polyval(self._clamp(elapsed), self.coefficients)

    def lateral_velocity(self, elapsed: float | np.ndarray) -> float | np.ndarray:
        return P.polyval(self._clamp(elapsed), P.polyder(self.coefficients, 1))

    def lateral_acceleration(self, elapsed: float | np.ndarray) -> float | np.ndarray:
        return P.polyval(self._clamp(elapsed), P.polyder(self.coefficients, 2))

    def lateral_jerk(self, elapsed: float | np.ndarray) -> float | np.ndarray:
        return P.polyval(self._clamp(elapsed), P.polyder(self.coefficients, 3))


def minimum_duration(shift: float) -> float:
    """Shortest duration, rounded up to 0.1 s, meeting the accel/jerk limits."""
    distance = abs(shift)
    if distance == 0.0:
        return 0.0
    by_accel = math.sqrt(PEAK_ACCEL_FACTOR * distance / MAX_ACCEL_MS2)
    by_jerk = (PEAK_JERK_FACTOR * distance / MAX_JERK_MS3) ** (1.0 / 3.0)
    steps = math.ceil(max(by_accel, by_jerk) / DURATION_RESOLUTION_S - 1e-9)
    return steps * DURATION_RESOLUTION_S


def quintic_coefficients(d_start: float, d_end: float, duration: float) -> np.ndarray:
    """Solve the rest-to-rest quintic for the given endpoints."""
    if duration <= 0.0:
        return np.array([d_start, 0.0, 0.0, 0.0, 0.0, 0.0])

    # Start conditions fix a0..a2; end conditions give a linear system for a3..a5.
    t = duration
    a = np.array([
        [t ** 3, t ** 4, t ** 5],
        [3 * t ** 2, 4 * t ** 3, 5 * t ** 4],
        [6 * t, 12 * t ** 2, 20 * t ** 3],
    ])
    b = np.array([d_end - d_start, 0.0, 0.0])
    a3, a4, a5 = np.linalg.solve(a, b)
    return np.array([d_start, 0.0, 0.0, a3, a4, a5])


def plan_lane_change(world: WorldState, target_lane: int) -> ManeuverPlan:
    """Plan the ego's move from its current lane centre to ``target_lane``."""
    track = world.track
    if world.active_maneuver is not None:
        raise ManeuverError("A lane change is already in progress.")
    if not 0 <= target_lane < track.lane_count:
        raise ManeuverError(f"Target lane {target_lane} is outside lanes 0..{track.lane_count - 1}.")

    source_lane = world.ego_lane
    if abs(target_lane - source_lane) > 1:
        raise ManeuverError(f"Target lane {target_lane} is not adjacent to lane {source_lane}.")

    d_start = track.lane_center(source_lane)
    d_end = track.lane_center(target_lane)
    duration = minimum_duration(d_end - d_start)

    return ManeuverPlan(
        start_time=world.time,
        duration=duration,
        source_lane=source_lane,
        target_lane=target_lane,
        coefficients=quintic_coefficients(d_start, d_end, duration),
    )
