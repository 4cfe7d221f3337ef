"""Rule-based veto of unsafe lane changes.

Neighbours are predicted to keep their lane and current speed; the ego keeps
its current speed and follows the planned lateral profile. A lane change is
rejected as soon as, at some sample time, a neighbour within the lateral
conflict width is closer than ``min_gap`` beyond both body half-lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .agent.actions import Action
from .config import LATERAL_CONFLICT_WIDTH_M
from .sim.maneuver import ManeuverPlan
from .sim.world import EGO_INDEX, WorldState


class SafetyConfigError(Exception):
    """Raised for invalid safety filter settings."""


@dataclass
class SafetyConfig:
    # None means plan duration + horizon_margin.
    horizon: Optional[float] = None
    horizon_margin: float = 1.0
    sample_dt: float = 0.1
    min_gap: float = 8.0
    lateral_conflict_width: float = LATERAL_CONFLICT_WIDTH_M

    def validate(self) -> None:
        if self.horizon is not None and self.horizon <= 0:
            raise SafetyConfigError(f"horizon must be positive, got {self.horizon}.")
        if self.horizon_margin < 0:
            raise SafetyConfigError(f"horizon_margin must be non-negative, got {self.horizon_margin}.")
        if self.sample_dt <= 0:
            raise SafetyConfigError(f"sample_dt must be positive, got {self.sample_dt}.")
        if self.min_gap <= 0:
            raise SafetyConfigError(f"min_gap must be positive, got {self.min_gap}.")
        if self.lateral_conflict_width <= 0:
            raise SafetyConfigError(
                f"lateral_conflict_width must be positive, got {self.lateral_conflict_width}."
            )

    def horizon_for(self, plan: Optional[ManeuverPlan]) -> float:
        if self.horizon is not None:
            return self.horizon
        duration = plan.duration if plan is not None else 0.0
        return max(duration + self.horizon_margin, self.sample_dt)


@dataclass(eq=False)
class PredictedTrajectory:
    """Samples as rows of (t, s, d), equally spaced by ``sample_dt``."""

    vehicle_id: int
    samples: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def s(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def d(self) -> np.ndarray:
        return self.samples[:, 2]


@dataclass(frozen=True)
class SafetyVerdict:
    accepted: bool
    reason: Optional[str] = None
    vehicle_id: Optional[int] = None
    time: Optional[float] = None

    @property
    def label(self) -> str:
        return "accept" if self.accepted else "reject"


ACCEPT = SafetyVerdict(accepted=True)


def sample_times(horizon: float, sample_dt: float) -> np.ndarray:
    count = int(round(horizon / sample_dt)) + 1
    return np.arange(count) * sample_dt


def predict_neighbors(
    world: WorldState,
    cfg: SafetyConfig,
    *,
    horizon: Optional[float] = None,
) -> List[PredictedTrajectory]:
    times = sample_times(cfg.horizon_for(None) if horizon is None else horizon, cfg.sample_dt)
    lap = world.track.lap_length
    trajectories: List[PredictedTrajectory] = []
    for index in range(world.vehicle_count):
        if index == EGO_INDEX:
            continue
        s = np.mod(world.s[index] + world.speed[index] * times, lap)
        d = np.full_like(times, world.d[index])
        trajectories.append(
            PredictedTrajectory(vehicle_id=int(world.ids[index]), samples=np.column_stack((times, s, d)))
        )
    return trajectories


def predict_ego(world: WorldState, plan: ManeuverPlan, cfg: SafetyConfig) -> PredictedTrajectory:
    times = sample_times(cfg.horizon_for(plan), cfg.sample_dt)
    s = np.mod(world.ego_s + world.ego_speed * times, world.track.lap_length)
    d = np.asarray(plan.lateral_position(times), dtype=float)
    return PredictedTrajectory(vehicle_id=world.ego_id, samples=np.column_stack((times, s, d)))


def check_action(
    world: WorldState,
    action: Action,
    plan: Optional[ManeuverPlan],
    cfg: SafetyConfig,
) -> SafetyVerdict:
    if Action(action) is Action.KEEP_LANE:
        return ACCEPT
    if plan is None:
        raise ValueError(f"A lane change ({Action(action).name}) needs a ManeuverPlan to check.")

    ego = predict_ego(world, plan, cfg)
    neighbors = predict_neighbors(world, cfg, horizon=cfg.horizon_for(plan))
    if not neighbors:
        return ACCEPT

    lap = world.track.lap_length
    ego_half = float(world.length[EGO_INDEX]) / 2.0
    npc_s = np.stack([n.s for n in neighbors])
    npc_d = np.stack([n.d for n in neighbors])
    npc_half = world.length[1:, None] / 2.0

    forward = np.mod(npc_s - ego.s[None, :], lap)
    separation = np.minimum(forward, lap - forward)
    conflict = np.abs(npc_d - ego.d[None, :]) < cfg.lateral_conflict_width
    violation = conflict & (separation < cfg.min_gap + ego_half + npc_half)
    if not violation.any():
        return ACCEPT

    # Earliest violating sample, then the lowest id at that sample.
    sample = int(np.flatnonzero(violation.any(axis=0))[0])
    offender = int(np.flatnonzero(violation[:, sample])[0])
    vehicle_id = neighbors[offender].vehicle_id
    time = float(ego.t[sample])
    return SafetyVerdict(
        accepted=False,
        reason=(
            f"vehicle {vehicle_id} within {separation[offender, sample]:.1f} m "
            f"at t+{time:.1f} s (needs {cfg.min_gap + ego_half + npc_half[offender, 0]:.1f} m)"
        ),
        vehicle_id=vehicle_id,
        time=time,
    )
