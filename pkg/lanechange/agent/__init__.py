"""Deep Q-learning agent.

- actions: action space, epsilon-greedy selection and decay
- network: Q-network parameters, forward pass and backpropagation
- optimizer: Adam
- replay: experience replay buffer
- dqn: the learning agent tying the above together
- checkpoint: binary save/load with a resume block
"""

from .actions import ACTION_COUNT, Action, decay_eps, eps_after, select_action
from .checkpoint import Checkpoint, CheckpointError, TrainingState, load_checkpoint, save_checkpoint
from .config import TrainConfig, TrainConfigError
from .dqn import DQNAgent, sync_target
from .network import (
    NetworkParams,
    NetworkShapeError,
    TrainingDivergenceError,
    forward,
    forward_batch,
    init_params,
    loss_and_gradients,
    td_targets,
)
from .optimizer import AdamState, adam_step
from .replay import ReplayBuffer, ReplayError, Transition, replay_push, replay_sample

__all__ = [
    "ACTION_COUNT",
    "Action",
    "decay_eps",
    "eps_after",
    "select_action",
    "Checkpoint",
    "CheckpointError",
    "TrainingState",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainConfigError",
    "DQNAgent",
    "sync_target",
    "NetworkParams",
    "NetworkShapeError",
    "TrainingDivergenceError",
    "forward",
    "forward_batch",
    "init_params",
    "loss_and_gradients",
    "td_targets",
    "AdamState",
    "adam_step",
    "ReplayBuffer",
    "ReplayError",
    "Transition",
    "replay_push",
    "replay_sample",
]
