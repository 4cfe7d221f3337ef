"""Experience replay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List

import numpy as np

from ..state_encoder import StateTensor
from .actions import Action


class ReplayError(Exception):
    """Raised on invalid buffer capacity or when sampling an under-filled buffer."""


@dataclass(eq=False)
class Transition:
    state: StateTensor
    action: Action
    reward: float
    next_state: StateTensor
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform sampling.

    Once full, each push overwrites the oldest entry.
    """

    def __init__(self, capacity: int) -> None:
        if capacity <= 0:
            raise ReplayError(f"Replay capacity must be positive, got {capacity}.")
        self.capacity = capacity
        self._items: List[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Transition]:
        # Oldest first
        return iter(self._items[self._next:] + self._items[:self._next])

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        """Distinct transitions within one batch, uniformly chosen."""
        if batch_size > len(self._items):
            raise ReplayError(f"Cannot sample {batch_size} transitions from a buffer of {len(self._items)}.")
        picks = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in picks]


def replay_push(buffer: ReplayBuffer, transition: Transition) -> None:
    buffer.push(transition)


def replay_sample(buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator) -> List[Transition]:
    return buffer.sample(batch_size, rng)
