"""Highway traffic simulation.

- world: vehicle state, spawning, stepping and collision detection
- controller: rule-based follow controller
- maneuver: quintic lane-change planner
- trace: line-delimited episode traces
"""

from .controller import follow_controller, safe_gap
from .maneuver import ManeuverError, ManeuverPlan, plan_lane_change
from .trace import TraceWriter, read_trace, safety_rate_from_traces
from .world import (
    SimConfig,
    StepEvents,
    TrackConfig,
    VehicleState,
    WorldConfigError,
    WorldState,
    detect_collision,
    spawn_world,
    start_maneuver,
    step,
)

__all__ = [
    "follow_controller",
    "safe_gap",
    "ManeuverError",
    "ManeuverPlan",
    "plan_lane_change",
    "TraceWriter",
    "read_trace",
    "safety_rate_from_traces",
    "SimConfig",
    "StepEvents",
    "TrackConfig",
    "VehicleState",
    "WorldConfigError",
    "WorldState",
    "detect_collision",
    "spawn_world",
    "start_maneuver",
    "step",
]
