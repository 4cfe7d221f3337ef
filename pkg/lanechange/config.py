"""Shared constants and unit conversions."""

from __future__ import annotations

MPH_TO_MS = 0.44704
MS_TO_MPH = 1.0 / MPH_TO_MS

# Road and vehicle geometry
DEFAULT_LAP_LENGTH_M = 6946.0
DEFAULT_LANE_COUNT = 3
DEFAULT_LANE_WIDTH_M = 4.0
DEFAULT_SPEED_LIMIT_MS = 50.0 * MPH_TO_MS
VEHICLE_LENGTH_M = 5.5
VEHICLE_WIDTH_M = 2.0

# Shared by the collision model and the safety filter
LATERAL_CONFLICT_WIDTH_M = 2.8

# Comfort limits of the low-level controller
MAX_ACCEL_MS2 = 10.0
MAX_JERK_MS3 = 10.0

# Follow controller gains: safe_gap = standstill + headway * v
FOLLOW_STANDSTILL_GAP_M = 10.0
FOLLOW_TIME_HEADWAY_S = 1.0
FOLLOW_GAP_GAIN = 0.25
FREE_ROAD_GAIN = 1.0

# Lane index snaps to the target lane once within this lateral tolerance
LANE_SNAP_TOLERANCE_M = 0.2


def mph_to_ms(value: float) -> float:
    return value * MPH_TO_MS


def ms_to_mph(value: float) -> float:
    return value * MS_TO_MPH
