"""Training hyperparameters for the Q-learning agent."""

from __future__ import annotations

from dataclasses import astuple, dataclass


class TrainConfigError(Exception):
    """Raised when training hyperparameters are out of range."""


@dataclass
class TrainConfig:
    gamma: float = 0.95
    lr: float = 1e-4
    batch_size: int = 32
    buffer_capacity: int = 10000
    target_sync_every: int = 100
    eps0: float = 1.0
    eps_decay: float = 0.99985
    eps_min: float = 0.03

    def validate(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise TrainConfigError(f"gamma must be in (0, 1], got {self.gamma}.")
        if not 0.0 <= self.eps_min <= self.eps0 <= 1.0:
            raise TrainConfigError(
                f"Need 0 <= eps_min <= eps0 <= 1, got eps_min={self.eps_min}, eps0={self.eps0}."
            )
        if not 0.0 < self.eps_decay <= 1.0:
            raise TrainConfigError(f"eps_decay must be in (0, 1], got {self.eps_decay}.")
        for name in ("lr", "batch_size", "buffer_capacity", "target_sync_every"):
            if getattr(self, name) <= 0:
                raise TrainConfigError(f"{name} must be positive, got {getattr(self, name)}.")
        if self.batch_size > self.buffer_capacity:
            raise TrainConfigError(
                f"batch_size ({self.batch_size}) cannot exceed buffer_capacity ({self.buffer_capacity})."
            )

    def as_floats(self) -> tuple:
        return tuple(float(v) for v in astuple(self))
