"""Per-decision-period reward."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class RewardConfigError(Exception):
    """Raised when reward settings break their sign constraints."""


class OutcomeCategory(str, Enum):
    COLLISION = "collision"
    ILLEGAL = "illegal_lane_change"
    INVALID = "invalid_lane_change"
    LEGAL = "legal_lane_change"
    NORMAL = "normal_drive"


@dataclass
class RewardConfig:
    r_co: float = -10.0
    r_ch1: float = -5.0
    r_ch2: float = -3.0
    r_ch3: float = -1.0
    # Per MPH
    lam: float = 0.04
    v_ref: float = 25.0
    # No car ahead in the ego lane within this range makes a lane change invalid.
    invalid_lookahead: float = 40.0

    def validate(self) -> None:
        for name in ("r_co", "r_ch1", "r_ch2", "r_ch3"):
            if getattr(self, name) > 0:
                raise RewardConfigError(f"{name} must not be positive, got {getattr(self, name)}.")
        if self.lam <= 0:
            raise RewardConfigError(f"lam must be positive, got {self.lam}.")
        if self.invalid_lookahead <= 0:
            raise RewardConfigError(f"invalid_lookahead must be positive, got {self.invalid_lookahead}.")


@dataclass
class DecisionOutcome:
    collision: bool = False
    illegal_lane_change: bool = False
    invalid_lane_change: bool = False
    legal_lane_change: bool = False
    avg_speed: float = 0.0  # MPH over the decision period

    @property
    def category(self) -> OutcomeCategory:
        # collision > illegal > invalid > legal > normal
        if self.collision:
            return OutcomeCategory.COLLISION
        if self.illegal_lane_change:
            return OutcomeCategory.ILLEGAL
        if self.invalid_lane_change:
            return OutcomeCategory.INVALID
        if self.legal_lane_change:
            return OutcomeCategory.LEGAL
        return OutcomeCategory.NORMAL


def speed_reward(avg_speed: float, cfg: RewardConfig) -> float:
    return cfg.lam * (avg_speed - cfg.v_ref)


def compute_reward(outcome: DecisionOutcome, cfg: RewardConfig) -> float:
    category = outcome.category
    if category is OutcomeCategory.COLLISION:
        return cfg.r_co
    if category is OutcomeCategory.ILLEGAL:
        return cfg.r_ch1
    if category is OutcomeCategory.INVALID:
        return cfg.r_ch2
    if category is OutcomeCategory.LEGAL:
        return speed_reward(outcome.avg_speed, cfg) + cfg.r_ch3
    return speed_reward(outcome.avg_speed, cfg)
