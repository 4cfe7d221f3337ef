"""Action space, epsilon-greedy selection and the exploration schedule."""

from __future__ import annotations

from enum import IntEnum
from typing import Tuple

import numpy as np

from .config import TrainConfig


class Action(IntEnum):
    KEEP_LANE = 0
    RIGHT = 1
    LEFT = 2

    @property
    def lane_offset(self) -> int:
        # Lane 0 is leftmost.
        return {Action.KEEP_LANE: 0, Action.RIGHT: 1, Action.LEFT: -1}[self]


ACTION_COUNT = len(Action)


def select_action(
    q: np.ndarray,
    eps: float,
    lane_flags: Tuple[float, float],
    rng: np.random.Generator,
) -> Action:
    """Uniform random action with probability ``eps``, else the first argmax.

    ``lane_flags`` (left exists, right exists) are deliberately not used to
    mask choices: moving off the road is penalised, not prevented.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}.")
    if eps > 0.0 and rng.random() < eps:
        return Action(int(rng.integers(ACTION_COUNT)))
    return Action(int(np.argmax(q)))


def decay_eps(eps: float, cfg: TrainConfig) -> float:
    return max(cfg.eps_min, eps * cfg.eps_decay)


def eps_after(steps: int, cfg: TrainConfig) -> float:
    """Closed form of ``steps`` applications of ``decay_eps`` from ``eps0``."""
    return max(cfg.eps_min, cfg.eps0 * cfg.eps_decay ** steps)
