"""Binary checkpoint files.

Layout (all little-endian):

- magic ``LCDQN\\0\\0\\0`` (8 bytes), u32 format version
- u32 x 8 architecture dims: grid rows, grid cols, aux size, conv1 filters,
  conv2 filters, dense1 units, dense2 units, actions
- f64 x 8 TrainConfig echo (gamma, lr, batch_size, buffer_capacity,
  target_sync_every, eps0, eps_decay, eps_min)
- online parameters as f32 in declaration order
- u32 resume flag, 1 when a resume block follows and 0 when the file ends here
- resume block: u64 episodes_done, grad_steps, decision_steps, adam step;
  f64 eps; then target parameters, Adam first and second moments as f64
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..state_encoder import AUX_SIZE, GRID_ROWS
from .actions import ACTION_COUNT
from .config import TrainConfig
from .network import (
    CONV1_FILTERS,
    CONV2_FILTERS,
    DENSE1_UNITS,
    DENSE2_UNITS,
    GRID_COLS,
    NetworkParams,
)
from .optimizer import AdamState

MAGIC = b"LCDQN\x00\x00\x00"
FORMAT_VERSION = 1
ARCHITECTURE = (GRID_ROWS, GRID_COLS, AUX_SIZE, CONV1_FILTERS, CONV2_FILTERS, DENSE1_UNITS, DENSE2_UNITS, ACTION_COUNT)
ARCHITECTURE_NAMES = ("grid_rows", "grid_cols", "aux", "conv1", "conv2", "dense1", "dense2", "actions")


class CheckpointError(Exception):
    """Raised when a checkpoint cannot be written or read back."""


@dataclass(eq=False)
class TrainingState:
    """Everything besides the online parameters needed to resume training."""

    episodes_done: int
    grad_steps: int
    decision_steps: int
    eps: float
    target: NetworkParams
    adam: AdamState


@dataclass(eq=False)
class Checkpoint:
    params: NetworkParams
    train_config: TrainConfig
    training_state: Optional[TrainingState] = None


def _params_bytes(params: NetworkParams, dtype: str) -> bytes:
    return b"".join(np.ascontiguousarray(value, dtype=dtype).tobytes() for _, value in params.items())


def save_checkpoint(
    path: str | Path,
    params: NetworkParams,
    train_config: TrainConfig,
    training_state: Optional[TrainingState] = None,
) -> Path:
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CheckpointError(f"Cannot create checkpoint directory {out.parent}: {exc}") from exc

    chunks: List[bytes] = [
        MAGIC,
        np.array([FORMAT_VERSION], dtype="<u4").tobytes(),
        np.array(ARCHITECTURE, dtype="<u4").tobytes(),
        np.array(train_config.as_floats(), dtype="<f8").tobytes(),
        _params_bytes(params, "<f4"),
        np.array([1 if training_state is not None else 0], dtype="<u4").tobytes(),
    ]
    if training_state is not None:
        state = training_state
        chunks += [
            np.array(
                [state.episodes_done, state.grad_steps, state.decision_steps, state.adam.step],
                dtype="<u8",
            ).tobytes(),
            np.array([state.eps], dtype="<f8").tobytes(),
            _params_bytes(state.target, "<f8"),
            _params_bytes(state.adam.m, "<f8"),
            _params_bytes(state.adam.v, "<f8"),
        ]

    # Write then rename so an interrupted save never leaves a truncated file.
    tmp = out.with_suffix(out.suffix + ".tmp")
    try:
        tmp.write_bytes(b"".join(chunks))
        tmp.replace(out)
    except OSError as exc:
        raise CheckpointError(f"Cannot write checkpoint {out}: {exc}") from exc
    return out


class _Reader:
    def __init__(self, data: bytes, source: Path) -> None:
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, dtype: str, count: int) -> np.ndarray:
        size = np.dtype(dtype).itemsize * count
        if self.offset + size > len(self.data):
            raise CheckpointError(f"{self.source} is truncated at byte {self.offset}.")
        values = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset)
        self.offset += size
        return values

    def take_params(self, dtype: str) -> NetworkParams:
        tensors = {}
        for name, shape in NetworkParams.SHAPES.items():
            count = int(np.prod(shape))
            tensors[name] = self.take(dtype, count).astype(np.float64).reshape(shape)
        return NetworkParams(**tensors)


def load_checkpoint(path: str | Path) -> Checkpoint:
    source = Path(path)
    if not source.exists():
        raise CheckpointError(f"Checkpoint not found: {source}")
    reader = _Reader(source.read_bytes(), source)

    if bytes(reader.take("u1", len(MAGIC))) != MAGIC:
        raise CheckpointError(f"{source} is not a checkpoint (bad magic).")
    version = int(reader.take("<u4", 1)[0])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{source} has format version {version}; only {FORMAT_VERSION} is supported.")

    dims = tuple(int(v) for v in reader.take("<u4", len(ARCHITECTURE)))
    mismatched = _mismatches(dims)
    if mismatched:
        raise CheckpointError(f"{source} architecture mismatch: {', '.join(mismatched)}.")

    echo = reader.take("<f8", 8)
    train_config = TrainConfig(
        gamma=float(echo[0]), lr=float(echo[1]), batch_size=int(echo[2]), buffer_capacity=int(echo[3]),
        target_sync_every=int(echo[4]), eps0=float(echo[5]), eps_decay=float(echo[6]), eps_min=float(echo[7]),
    )
    params = reader.take_params("<f4")
    if not params.is_finite():
        raise CheckpointError(f"{source} contains non-finite parameters.")

    training_state = None
    resume_flag = int(reader.take("<u4", 1)[0])
    if resume_flag not in (0, 1):
        raise CheckpointError(f"{source} has resume flag {resume_flag}; expected 0 or 1.")
    if resume_flag == 1:
        counters = reader.take("<u8", 4)
        eps = float(reader.take("<f8", 1)[0])
        target = reader.take_params("<f8")
        m = reader.take_params("<f8")
        v = reader.take_params("<f8")
        training_state = TrainingState(
            episodes_done=int(counters[0]),
            grad_steps=int(counters[1]),
            decision_steps=int(counters[2]),
            eps=eps,
            target=target,
            adam=AdamState(m=m, v=v, step=int(counters[3])),
        )
    if reader.offset != len(reader.data):
        raise CheckpointError(f"{source} has {len(reader.data) - reader.offset} unexpected trailing bytes.")

    return Checkpoint(params=params, train_config=train_config, training_state=training_state)


def _mismatches(dims: Tuple[int, ...]) -> List[str]:
    return [
        f"{name}={got} (expected {want})"
        for name, got, want in zip(ARCHITECTURE_NAMES, dims, ARCHITECTURE)
        if got != want
    ]
