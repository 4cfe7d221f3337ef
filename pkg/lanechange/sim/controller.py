"""Rule-based longitudinal speed controller shared by the ego and NPC traffic."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..config import (
    FOLLOW_GAP_GAIN,
    FOLLOW_STANDSTILL_GAP_M,
    FOLLOW_TIME_HEADWAY_S,
    FREE_ROAD_GAIN,
    MAX_ACCEL_MS2,
)


def safe_gap(ego_speed: float | np.ndarray) -> float | np.ndarray:
    """Bumper-to-bumper gap the controller settles at behind a leader."""
    return FOLLOW_STANDSTILL_GAP_M + FOLLOW_TIME_HEADWAY_S * ego_speed


def follow_controller(
    ego_speed: float,
    lead_gap: Optional[float],
    lead_speed: Optional[float],
    limit: float,
) -> float:
    """Acceleration command for one vehicle.

    ``lead_gap`` is the bumper-to-bumper gap to the leader, or ``None`` when
    the road ahead is free. The speed term uses gain 1/headway so that the gap
    error decays as e' = -FOLLOW_GAP_GAIN * e while unsaturated; once
    following, the gap never closes below ``safe_gap``.
    """
    free = FREE_ROAD_GAIN * (limit - ego_speed)
    if lead_gap is None:
        return float(np.clip(free, -MAX_ACCEL_MS2, MAX_ACCEL_MS2))
    if lead_gap <= 0.0:
        return -MAX_ACCEL_MS2

    follow = (
        FOLLOW_GAP_GAIN * (lead_gap - safe_gap(ego_speed))
        + (lead_speed - ego_speed) / FOLLOW_TIME_HEADWAY_S
    )
    return float(np.clip(min(free, follow), -MAX_ACCEL_MS2, MAX_ACCEL_MS2))


def follow_controller_batch(
    speeds: np.ndarray,
    lead_gaps: np.ndarray,
    lead_speeds: np.ndarray,
    limits: np.ndarray,
) -> np.ndarray:
    """Vectorised ``follow_controller``; ``lead_gaps`` uses ``inf`` for no leader."""
    free = FREE_ROAD_GAIN * (limits - speeds)
    has_leader = np.isfinite(lead_gaps)
    gaps = np.where(has_leader, lead_gaps, 0.0)
    follow = (
        FOLLOW_GAP_GAIN * (gaps - safe_gap(speeds))
        + (np.where(has_leader, lead_speeds, speeds) - speeds) / FOLLOW_TIME_HEADWAY_S
    )
    accel = np.where(has_leader, np.minimum(free, follow), free)
    accel = np.where(has_leader & (lead_gaps <= 0.0), -MAX_ACCEL_MS2, accel)
    return np.clip(accel, -MAX_ACCEL_MS2, MAX_ACCEL_MS2)
