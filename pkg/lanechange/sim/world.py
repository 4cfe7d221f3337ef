"""Seeded three-lane looped-highway world in Frenet coordinates.

Vehicles live in flat numpy arrays (index 0 is always the ego) so one
simulation step is a handful of vectorised operations; ``WorldState.vehicles``
exposes them as ``VehicleState`` records for callers that want objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import (
    DEFAULT_LANE_COUNT,
    DEFAULT_LANE_WIDTH_M,
    DEFAULT_LAP_LENGTH_M,
    DEFAULT_SPEED_LIMIT_MS,
    LANE_SNAP_TOLERANCE_M,
    LATERAL_CONFLICT_WIDTH_M,
    MAX_ACCEL_MS2,
    VEHICLE_LENGTH_M,
    VEHICLE_WIDTH_M,
    mph_to_ms,
)
from .controller import follow_controller_batch
from .maneuver import ManeuverPlan

EGO_INDEX = 0
EGO_ID = 0


class WorldConfigError(Exception):
    """Raised when track or simulation settings are invalid or infeasible."""


@dataclass
class TrackConfig:
    lap_length: float = DEFAULT_LAP_LENGTH_M
    lane_count: int = DEFAULT_LANE_COUNT
    lane_width: float = DEFAULT_LANE_WIDTH_M
    speed_limit: float = DEFAULT_SPEED_LIMIT_MS

    def validate(self) -> None:
        if self.lap_length <= 0:
            raise WorldConfigError(f"lap_length must be positive, got {self.lap_length}.")
        if self.lane_count < 2:
            raise WorldConfigError(f"lane_count must be at least 2, got {self.lane_count}.")
        if self.lane_width <= VEHICLE_WIDTH_M:
            raise WorldConfigError(
                f"lane_width {self.lane_width} m must exceed the vehicle width {VEHICLE_WIDTH_M} m."
            )
        if self.speed_limit <= 0:
            raise WorldConfigError(f"speed_limit must be positive, got {self.speed_limit}.")

    def lane_center(self, lane: int | np.ndarray) -> float | np.ndarray:
        return (lane + 0.5) * self.lane_width

    @property
    def middle_lane(self) -> int:
        return self.lane_count // 2


@dataclass
class SimConfig:
    """Traffic and stepping settings.

    ``spawn_window`` limits NPC placement to that many metres ahead of the ego
    (0 spreads traffic over the whole lap). ``npc_hold_speed`` makes NPCs
    ignore the controller and cruise at their spawn speed.
    ``maneuver_speed_hold`` freezes the ego's speed while a lane change runs.
    """

    dt: float = 0.1
    npc_count: int = 20
    npc_speed_min: float = mph_to_ms(30.0)
    npc_speed_max: float = mph_to_ms(45.0)
    min_spawn_gap: float = 15.0
    max_episode_time: float = 450.0
    vehicle_length: float = VEHICLE_LENGTH_M
    spawn_window: float = 800.0
    npc_hold_speed: bool = False
    maneuver_speed_hold: bool = True

    @property
    def npc_speed_range(self) -> Tuple[float, float]:
        return self.npc_speed_min, self.npc_speed_max

    def validate(self, track: TrackConfig) -> None:
        if self.dt <= 0:
            raise WorldConfigError(f"dt must be positive, got {self.dt}.")
        if self.npc_count < 0:
            raise WorldConfigError(f"npc_count must be non-negative, got {self.npc_count}.")
        if not 0 < self.npc_speed_min <= self.npc_speed_max <= track.speed_limit:
            raise WorldConfigError(
                f"NPC speed range ({self.npc_speed_min}, {self.npc_speed_max}) must lie within "
                f"(0, {track.speed_limit}]."
            )
        if self.min_spawn_gap < 0:
            raise WorldConfigError(f"min_spawn_gap must be non-negative, got {self.min_spawn_gap}.")
        if self.max_episode_time <= 0:
            raise WorldConfigError(f"max_episode_time must be positive, got {self.max_episode_time}.")
        if self.vehicle_length <= 0:
            raise WorldConfigError(f"vehicle_length must be positive, got {self.vehicle_length}.")
        if self.spawn_window < 0:
            raise WorldConfigError(f"spawn_window must be non-negative, got {self.spawn_window}.")


@dataclass(frozen=True)
class VehicleState:
    id: int
    s: float
    d: float
    lane: int
    speed: float
    length: float = VEHICLE_LENGTH_M
    is_ego: bool = False


@dataclass
class StepEvents:
    collision: bool = False
    collision_ids: Optional[Tuple[int, int]] = None
    lap_completed: bool = False
    lane_change_completed: bool = False

    def to_record(self) -> Dict[str, object]:
        return {
            "collision": self.collision,
            "collision_ids": list(self.collision_ids) if self.collision_ids else None,
            "lap_completed": self.lap_completed,
            "lane_change_completed": self.lane_change_completed,
        }


@dataclass(eq=False)
class WorldState:
    """Snapshot of the whole world; ``step`` returns a new one."""

    track: TrackConfig
    sim: SimConfig
    time: float
    ids: np.ndarray
    s: np.ndarray
    d: np.ndarray
    lane: np.ndarray
    speed: np.ndarray
    length: np.ndarray
    cruise_speed: np.ndarray
    rng_state: Dict[str, object] = field(default_factory=dict)
    active_maneuver: Optional[ManeuverPlan] = None
    ego_odometer: float = 0.0

    @property
    def ego_id(self) -> int:
        return int(self.ids[EGO_INDEX])

    @property
    def ego_lane(self) -> int:
        return int(self.lane[EGO_INDEX])

    @property
    def ego_s(self) -> float:
        return float(self.s[EGO_INDEX])

    @property
    def ego_speed(self) -> float:
        return float(self.speed[EGO_INDEX])

    @property
    def vehicle_count(self) -> int:
        return int(self.ids.size)

    @property
    def vehicles(self) -> List[VehicleState]:
        return [self.vehicle(i) for i in range(self.vehicle_count)]

    @property
    def ego(self) -> VehicleState:
        return self.vehicle(EGO_INDEX)

    def vehicle(self, index: int) -> VehicleState:
        return VehicleState(
            id=int(self.ids[index]),
            s=float(self.s[index]),
            d=float(self.d[index]),
            lane=int(self.lane[index]),
            speed=float(self.speed[index]),
            length=float(self.length[index]),
            is_ego=index == EGO_INDEX,
        )

    def copy(self) -> WorldState:
        return replace(
            self,
            ids=self.ids.copy(),
            s=self.s.copy(),
            d=self.d.copy(),
            lane=self.lane.copy(),
            speed=self.speed.copy(),
            length=self.length.copy(),
            cruise_speed=self.cruise_speed.copy(),
            rng_state=dict(self.rng_state),
        )

    def identical_to(self, other: WorldState) -> bool:
        """Bitwise equality of every array and scalar in the snapshot."""
        arrays = ("ids", "s", "d", "lane", "speed", "length", "cruise_speed")
        if any(not np.array_equal(getattr(self, name), getattr(other, name)) for name in arrays):
            return False
        if self.active_maneuver is None or other.active_maneuver is None:
            same_plan = self.active_maneuver is other.active_maneuver
        else:
            a, b = self.active_maneuver, other.active_maneuver
            same_plan = (
                (a.start_time, a.duration, a.source_lane, a.target_lane)
                == (b.start_time, b.duration, b.source_lane, b.target_lane)
                and np.array_equal(a.coefficients, b.coefficients)
            )
        return (
            same_plan
            and self.time == other.time
            and self.ego_odometer == other.ego_odometer
            and self.rng_state == other.rng_state
            and self.track == other.track
            and self.sim == other.sim
        )


def spawn_world(track: TrackConfig, sim: SimConfig, seed: int) -> WorldState:
    """Place the ego at rest at s=0 in the middle lane and scatter NPC traffic."""
    track.validate()
    sim.validate(track)
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise WorldConfigError(f"Seed must be a non-negative integer, got {seed!r}.")

    slot = sim.vehicle_length + sim.min_spawn_gap
    if sim.npc_count * slot > track.lap_length * track.lane_count:
        raise WorldConfigError(
            f"Cannot fit {sim.npc_count} NPCs with {sim.min_spawn_gap} m gaps on "
            f"{track.lane_count} lanes of {track.lap_length} m."
        )

    rng = np.random.default_rng(int(seed))
    ego_lane = track.middle_lane

    npc_lanes = rng.permutation(np.arange(sim.npc_count) % track.lane_count)
    npc_speeds = rng.uniform(sim.npc_speed_min, sim.npc_speed_max, size=sim.npc_count)
    npc_s = np.zeros(sim.npc_count)

    for lane in range(track.lane_count):
        members = np.flatnonzero(npc_lanes == lane)
        if members.size == 0:
            continue
        low, high = _spawn_range(track, sim, is_ego_lane=lane == ego_lane)
        slack = (high - low) - (members.size - 1) * slot
        if slack < 0:
            raise WorldConfigError(
                f"Lane {lane} cannot hold {members.size} NPCs between s={low:.1f} and s={high:.1f} m."
            )
        offsets = np.sort(rng.uniform(0.0, slack, size=members.size))
        npc_s[members] = low + offsets + np.arange(members.size) * slot

    count = sim.npc_count + 1
    lanes = np.concatenate(([ego_lane], npc_lanes)).astype(int)
    world = WorldState(
        track=track,
        sim=sim,
        time=0.0,
        ids=np.arange(count),
        s=np.mod(np.concatenate(([0.0], npc_s)), track.lap_length),
        d=np.asarray(track.lane_center(lanes), dtype=float),
        lane=lanes,
        speed=np.concatenate(([0.0], npc_speeds)),
        length=np.full(count, sim.vehicle_length),
        cruise_speed=np.concatenate(([track.speed_limit], npc_speeds)),
        rng_state=rng.bit_generator.state,
    )
    return world


def _spawn_range(track: TrackConfig, sim: SimConfig, *, is_ego_lane: bool) -> Tuple[float, float]:
    """Interval of admissible NPC centre positions for one lane."""
    slot = sim.vehicle_length + sim.min_spawn_gap
    low = slot if is_ego_lane else 0.0
    # Keeps the last car of the lane clear of the first one across the wrap.
    high = track.lap_length - slot
    if is_ego_lane:
        # The ego starts at rest, so a car spawned behind it needs its stopping distance too.
        high -= sim.npc_speed_max ** 2 / (2.0 * MAX_ACCEL_MS2)
    if 0.0 < sim.spawn_window < track.lap_length:
        high = min(high, sim.spawn_window)
    return low, high


def _forward_distance(s_from: np.ndarray, s_to: np.ndarray, lap_length: float) -> np.ndarray:
    return np.mod(s_to - s_from, lap_length)


def _circular_distance(s_a: np.ndarray, s_b: np.ndarray, lap_length: float) -> np.ndarray:
    forward = _forward_distance(s_a, s_b, lap_length)
    return np.minimum(forward, lap_length - forward)


def find_leaders(world: WorldState) -> Tuple[np.ndarray, np.ndarray]:
    """Bumper gap and speed of each vehicle's leader (``inf`` gap when none).

    A leader is the nearest vehicle ahead whose lateral distance is below the
    conflict width, so a mid-maneuver ego is seen from both lanes.
    """
    lap = world.track.lap_length
    ahead = _forward_distance(world.s[:, None], world.s[None, :], lap)
    lateral = np.abs(world.d[:, None] - world.d[None, :])
    candidate = lateral < LATERAL_CONFLICT_WIDTH_M
    np.fill_diagonal(candidate, False)

    masked = np.where(candidate, ahead, np.inf)
    leader = np.argmin(masked, axis=1)
    rows = np.arange(world.vehicle_count)
    centre_gap = masked[rows, leader]
    has_leader = np.isfinite(centre_gap)

    half_lengths = (world.length[:, None] + world.length[None, :]) / 2.0
    gaps = np.where(has_leader, centre_gap - half_lengths[rows, leader], np.inf)
    lead_speeds = np.where(has_leader, world.speed[leader], 0.0)
    return gaps, lead_speeds


def detect_collision(world: WorldState) -> Optional[Tuple[int, int]]:
    """Lowest-id pair whose bodies overlap longitudinally and laterally, if any."""
    lap = world.track.lap_length
    longitudinal = _circular_distance(world.s[:, None], world.s[None, :], lap)
    reach = (world.length[:, None] + world.length[None, :]) / 2.0
    lateral = np.abs(world.d[:, None] - world.d[None, :])
    overlap = (longitudinal < reach) & (lateral < LATERAL_CONFLICT_WIDTH_M)
    overlap = np.triu(overlap, k=1)
    pairs = np.argwhere(overlap)
    if pairs.size == 0:
        return None
    id_pairs = sorted(tuple(sorted((int(world.ids[i]), int(world.ids[j])))) for i, j in pairs)
    return id_pairs[0]


def step(world: WorldState, dt: float) -> Tuple[WorldState, StepEvents]:
    """Advance every vehicle by ``dt`` seconds."""
    if dt <= 0:
        raise WorldConfigError(f"dt must be positive, got {dt}.")

    track, sim = world.track, world.sim
    nxt = world.copy()
    events = StepEvents()

    gaps, lead_speeds = find_leaders(world)
    limits = world.cruise_speed.copy()
    limits[EGO_INDEX] = track.speed_limit
    accel = follow_controller_batch(world.speed, gaps, lead_speeds, limits)
    if sim.npc_hold_speed:
        accel[1:] = 0.0
    plan = world.active_maneuver
    if plan is not None and sim.maneuver_speed_hold:
        accel[EGO_INDEX] = 0.0

    # Positions advance with the speed held over the step; speeds update after.
    advanced = world.s + world.speed * dt
    events.lap_completed = bool(advanced[EGO_INDEX] >= track.lap_length)
    nxt.s = np.mod(advanced, track.lap_length)
    nxt.speed = np.maximum(world.speed + accel * dt, 0.0)
    nxt.time = world.time + dt
    nxt.ego_odometer = world.ego_odometer + float(world.speed[EGO_INDEX]) * dt

    if plan is not None:
        elapsed = nxt.time - plan.start_time
        nxt.d[EGO_INDEX] = plan.lateral_position(elapsed)
        target_center = track.lane_center(plan.target_lane)
        done = elapsed >= plan.duration - 1e-9
        if done and abs(nxt.d[EGO_INDEX] - target_center) < LANE_SNAP_TOLERANCE_M:
            nxt.lane[EGO_INDEX] = plan.target_lane
            nxt.active_maneuver = None
            events.lane_change_completed = plan.is_lane_change

    pair = detect_collision(nxt)
    if pair is not None:
        events.collision = True
        events.collision_ids = pair
    return nxt, events


def start_maneuver(world: WorldState, plan: ManeuverPlan) -> WorldState:
    """Return a copy of ``world`` with ``plan`` attached to the ego."""
    nxt = world.copy()
    nxt.active_maneuver = plan
    return nxt
