"""One episode of closed-loop driving: decide, filter, drive, reward, learn."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..agent import Action, DQNAgent, Transition
from ..config import ms_to_mph
from ..reward import DecisionOutcome, compute_reward
from ..safety_filter import SafetyVerdict, check_action
from ..settings import ExperimentConfig
from ..sim import ManeuverPlan, TraceWriter, WorldState, plan_lane_change, spawn_world, start_maneuver, step
from ..sim.world import EGO_INDEX, find_leaders
from ..state_encoder import encode
from .metrics import EpisodeMetrics

# Offset separating evaluation seeds from training seeds.
EVAL_SEED_OFFSET = 1_000_003


class EpisodeMode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


def episode_seed(master_seed: int, episode_index: int) -> int:
    """World seed for one episode, reproducible without running earlier ones."""
    return int(np.random.SeedSequence([master_seed, episode_index]).generate_state(1)[0])


def eval_episode_seed(master_seed: int, episode_index: int) -> int:
    return episode_seed(master_seed + EVAL_SEED_OFFSET, episode_index)


@dataclass
class DecisionRecord:
    time: float
    proposed_action: Action
    filter_verdict: str  # accept / reject / illegal / not_checked
    reason: Optional[str]
    executed_action: Action
    reward: float
    category: str

    def to_record(self) -> dict:
        return {
            "time": round(self.time, 6),
            "proposed_action": int(self.proposed_action),
            "filter_verdict": self.filter_verdict,
            "reason": self.reason,
            "executed_action": int(self.executed_action),
            "reward": self.reward,
            "category": self.category,
        }


def _car_ahead(world: WorldState, lookahead: float) -> bool:
    gaps, _ = find_leaders(world)
    return bool(gaps[EGO_INDEX] <= lookahead)


def _resolve_action(
    world: WorldState,
    action: Action,
    config: ExperimentConfig,
    filter_on: bool,
) -> Tuple[Optional[ManeuverPlan], str, Optional[str], bool]:
    """Turn a proposed action into (plan or None, verdict label, reason, illegal)."""
    if action is Action.KEEP_LANE:
        return None, "not_checked", None, False

    target_lane = world.ego_lane + action.lane_offset
    if not 0 <= target_lane < config.track.lane_count:
        return None, "illegal", f"lane {target_lane} is off the road", True

    plan = plan_lane_change(world, target_lane)
    if not filter_on:
        return plan, "not_checked", None, False
    verdict: SafetyVerdict = check_action(world, action, plan, config.safety)
    if not verdict.accepted:
        return None, verdict.label, verdict.reason, False
    return plan, verdict.label, None, False


def run_episode(
    seed: int,
    agent: DQNAgent,
    mode: EpisodeMode,
    filter_on: bool,
    config: ExperimentConfig,
    *,
    episode_index: int = 0,
    trace_path: Optional[str | Path] = None,
) -> Tuple[EpisodeMetrics, List[Transition]]:
    """Drive one freshly spawned world until a collision, a full lap or the time cap.

    In ``train`` mode every decision is pushed to the agent, which takes a
    gradient step once its buffer is large enough. In ``eval`` mode actions
    are greedy and the agent is left untouched.
    """
    mode = EpisodeMode(mode)
    track, sim = config.track, config.sim
    gamma = config.train.gamma
    greedy = mode is EpisodeMode.EVAL
    max_steps = int(round(sim.max_episode_time / sim.dt))

    world = spawn_world(track, sim, seed)
    state = encode(world, config.encoder, track)
    transitions: List[Transition] = []
    trace = TraceWriter(trace_path) if trace_path is not None else None

    wall_steps = 0
    lane_changes = 0
    collided = False
    finished = False
    discounted_return = 0.0
    discount = 1.0

    try:
        while not finished:
            action, _ = agent.act(state, greedy=greedy)
            plan, verdict, reason, illegal = _resolve_action(world, action, config, filter_on)
            invalid = plan is not None and not _car_ahead(world, config.reward.invalid_lookahead)

            if plan is not None:
                world = start_maneuver(world, plan)
                lane_changes += 1
            executed = action if plan is not None else Action.KEEP_LANE
            decision_time = world.time
            start_odometer = world.ego_odometer

            period_steps = 0
            while True:
                world, events = step(world, sim.dt)
                wall_steps += 1
                period_steps += 1
                if trace is not None:
                    trace.write_step(world, events)
                if events.collision and world.ego_id in events.collision_ids:
                    collided = True
                if collided or events.lap_completed or wall_steps >= max_steps:
                    finished = True
                    break
                if world.active_maneuver is None and period_steps >= config.steps_per_decision:
                    break

            elapsed = world.time - decision_time
            outcome = DecisionOutcome(
                collision=collided,
                illegal_lane_change=illegal,
                invalid_lane_change=invalid,
                legal_lane_change=plan is not None,
                avg_speed=ms_to_mph((world.ego_odometer - start_odometer) / elapsed),
            )
            reward = compute_reward(outcome, config.reward)
            next_state = encode(world, config.encoder, track)
            transition = Transition(state, action, reward, next_state, terminal=collided)
            transitions.append(transition)
            discounted_return += discount * reward
            discount *= gamma

            if mode is EpisodeMode.TRAIN:
                agent.observe(transition)
            if trace is not None:
                trace.write_decision(DecisionRecord(
                    time=decision_time,
                    proposed_action=action,
                    filter_verdict=verdict,
                    reason=reason,
                    executed_action=executed,
                    reward=reward,
                    category=outcome.category.value,
                ).to_record())
            state = next_state
    finally:
        if trace is not None:
            trace.close()

    metrics = EpisodeMetrics(
        episode_index=episode_index,
        phase=mode.value,
        lane_changes=lane_changes,
        collisions=int(collided),
        avg_speed=ms_to_mph(world.ego_odometer / world.time) if world.time > 0 else 0.0,
        distance=world.ego_odometer,
        discounted_return=discounted_return,
        wall_steps=wall_steps,
        eps_at_end=0.0 if greedy else agent.eps,
    )
    return metrics, transitions
