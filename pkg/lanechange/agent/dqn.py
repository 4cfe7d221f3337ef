"""Deep Q-learning agent: online/target networks, Adam, replay and epsilon."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..state_encoder import StateTensor
from .actions import Action, decay_eps, select_action
from .checkpoint import TrainingState
from .config import TrainConfig
from .network import NetworkParams, forward, init_params, loss_and_gradients, td_targets
from .optimizer import AdamState, adam_step
from .replay import ReplayBuffer, Transition


def sync_target(params: NetworkParams) -> NetworkParams:
    """Frozen deep copy used for TD targets."""
    return params.copy()


class DQNAgent:
    """Owns everything that changes while learning.

    ``rng`` drives exploration and replay sampling only; world randomness
    lives in the simulator.
    """

    def __init__(
        self,
        cfg: TrainConfig,
        *,
        rng: np.random.Generator,
        params: Optional[NetworkParams] = None,
    ) -> None:
        cfg.validate()
        self.cfg = cfg
        self.rng = rng
        self.params = params if params is not None else init_params(rng)
        self.target = sync_target(self.params)
        self.adam = AdamState()
        self.replay = ReplayBuffer(cfg.buffer_capacity)
        self.eps = cfg.eps0
        self.grad_steps = 0
        self.decision_steps = 0
        self.target_syncs = 0

    def act(self, state: StateTensor, *, greedy: bool = False) -> Tuple[Action, np.ndarray]:
        q = forward(self.params, state)
        lane_flags = (float(state.aux[1]), float(state.aux[2]))
        action = select_action(q, 0.0 if greedy else self.eps, lane_flags, self.rng)
        return action, q

    def observe(self, transition: Transition) -> Optional[float]:
        """Store one decision, take one gradient step when possible, decay epsilon."""
        self.replay.push(transition)
        self.decision_steps += 1
        self.eps = decay_eps(self.eps, self.cfg)

        if len(self.replay) < self.cfg.batch_size:
            return None
        return self.learn()

    def learn(self) -> float:
        batch = self.replay.sample(self.cfg.batch_size, self.rng)
        targets = td_targets(batch, self.target, self.cfg.gamma)
        loss, grads = loss_and_gradients(self.params, batch, targets)
        self.params = adam_step(self.params, grads, self.adam, self.cfg.lr)
        self.grad_steps += 1
        if self.grad_steps % self.cfg.target_sync_every == 0:
            self.target = sync_target(self.params)
            self.target_syncs += 1
        return loss

    def snapshot(self) -> NetworkParams:
        """Read-only copy of the online parameters for evaluation workers."""
        return self.params.copy()

    def training_state(self, episodes_done: int) -> TrainingState:
        return TrainingState(
            episodes_done=episodes_done,
            grad_steps=self.grad_steps,
            decision_steps=self.decision_steps,
            eps=self.eps,
            target=self.target.copy(),
            adam=self.adam.copy(),
        )

    def restore(self, state: TrainingState) -> None:
        """Resume from a checkpoint's training state; the replay buffer starts empty."""
        self.target = state.target.copy()
        self.adam = state.adam.copy()
        self.eps = state.eps
        self.grad_steps = state.grad_steps
        self.decision_steps = state.decision_steps
        self.target_syncs = state.grad_steps // self.cfg.target_sync_every
