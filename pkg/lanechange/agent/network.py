"""Q-network with hand-written forward and backward passes.

Topology: conv(16 @ 3x3) -> ReLU -> conv(32 @ 3x1) -> ReLU -> flatten ->
concat aux -> dense(128) -> ReLU -> dense(64) -> ReLU -> linear head(3).

Valid convolutions with stride 1 turn the 45x3 grid into a 43x1 map and then
a 41x1 map; the second kernel is 3x1 because nothing wider fits a width-1
map. Both convolutions are computed as patch matrices times flattened kernels.
Everything runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..state_encoder import AUX_SIZE, GRID_ROWS, StateTensor
from .actions import ACTION_COUNT

GRID_COLS = 3
CONV1_FILTERS = 16
CONV2_FILTERS = 32
KERNEL_ROWS = 3
DENSE1_UNITS = 128
DENSE2_UNITS = 64

CONV1_ROWS = GRID_ROWS - KERNEL_ROWS + 1
CONV1_COLS = GRID_COLS - 3 + 1
CONV2_ROWS = CONV1_ROWS - KERNEL_ROWS + 1
FLAT_SIZE = CONV2_FILTERS * CONV2_ROWS
DENSE1_INPUTS = FLAT_SIZE + AUX_SIZE


class NetworkShapeError(Exception):
    """Raised when inputs or parameters do not match the architecture."""


class TrainingDivergenceError(Exception):
    """Raised when the loss stops being finite."""


def _assert_architecture() -> None:
    if CONV1_COLS != 1:
        raise NetworkShapeError(f"conv1 must collapse the {GRID_COLS} lanes to one column, got {CONV1_COLS}.")
    if (CONV1_ROWS, CONV2_ROWS) != (43, 41):
        raise NetworkShapeError(f"Unexpected feature map heights {CONV1_ROWS} and {CONV2_ROWS}.")


_assert_architecture()


@dataclass(eq=False)
class NetworkParams:
    """All trainable tensors in declaration order; also used for gradients and moments."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    dense1_w: np.ndarray
    dense1_b: np.ndarray
    dense2_w: np.ndarray
    dense2_b: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray

    SHAPES = {
        "conv1_w": (CONV1_FILTERS, 1, KERNEL_ROWS, GRID_COLS),
        "conv1_b": (CONV1_FILTERS,),
        "conv2_w": (CONV2_FILTERS, CONV1_FILTERS, KERNEL_ROWS, 1),
        "conv2_b": (CONV2_FILTERS,),
        "dense1_w": (DENSE1_INPUTS, DENSE1_UNITS),
        "dense1_b": (DENSE1_UNITS,),
        "dense2_w": (DENSE1_UNITS, DENSE2_UNITS),
        "dense2_b": (DENSE2_UNITS,),
        "head_w": (DENSE2_UNITS, ACTION_COUNT),
        "head_b": (ACTION_COUNT,),
    }

    def __post_init__(self) -> None:
        for name, shape in self.SHAPES.items():
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if value.shape != shape:
                raise NetworkShapeError(f"{name} has shape {value.shape}, expected {shape}.")
            setattr(self, name, value)

    @classmethod
    def names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def zeros(cls) -> NetworkParams:
        return cls(**{name: np.zeros(shape) for name, shape in cls.SHAPES.items()})

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in self.names():
            yield name, getattr(self, name)

    def copy(self) -> NetworkParams:
        return NetworkParams(**{name: value.copy() for name, value in self.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(value)) for _, value in self.items())

    def identical_to(self, other: NetworkParams) -> bool:
        return all(np.array_equal(value, getattr(other, name)) for name, value in self.items())


def init_params(rng: np.random.Generator) -> NetworkParams:
    """He-uniform weights for the ReLU layers, LeCun-uniform head, zero biases."""
    def uniform(shape: Tuple[int, ...], fan_in: int, scale: float) -> np.ndarray:
        limit = np.sqrt(scale / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    shapes = NetworkParams.SHAPES
    return NetworkParams(
        conv1_w=uniform(shapes["conv1_w"], KERNEL_ROWS * GRID_COLS, 6.0),
        conv1_b=np.zeros(shapes["conv1_b"]),
        conv2_w=uniform(shapes["conv2_w"], CONV1_FILTERS * KERNEL_ROWS, 6.0),
        conv2_b=np.zeros(shapes["conv2_b"]),
        dense1_w=uniform(shapes["dense1_w"], DENSE1_INPUTS, 6.0),
        dense1_b=np.zeros(shapes["dense1_b"]),
        dense2_w=uniform(shapes["dense2_w"], DENSE1_UNITS, 6.0),
        dense2_b=np.zeros(shapes["dense2_b"]),
        head_w=uniform(shapes["head_w"], DENSE2_UNITS, 3.0),
        head_b=np.zeros(shapes["head_b"]),
    )


def stack_states(states: Sequence[StateTensor]) -> Tuple[np.ndarray, np.ndarray]:
    if not states:
        raise NetworkShapeError("Cannot stack an empty list of states.")
    grids = np.stack([s.grid for s in states])
    aux = np.stack([s.aux for s in states])
    _check_inputs(grids, aux)
    return grids, aux


def _check_inputs(grids: np.ndarray, aux: np.ndarray) -> None:
    if grids.ndim != 3 or grids.shape[1:] != (GRID_ROWS, GRID_COLS):
        raise NetworkShapeError(f"Grid batch has shape {grids.shape}, expected (B, {GRID_ROWS}, {GRID_COLS}).")
    if aux.shape != (grids.shape[0], AUX_SIZE):
        raise NetworkShapeError(f"Aux batch has shape {aux.shape}, expected ({grids.shape[0]}, {AUX_SIZE}).")


def _forward_cached(params: NetworkParams, grids: np.ndarray, aux: np.ndarray) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    batch = grids.shape[0]

    patches1 = sliding_window_view(grids, (KERNEL_ROWS, GRID_COLS), axis=(1, 2))
    patches1 = patches1.reshape(batch, CONV1_ROWS, KERNEL_ROWS * GRID_COLS)
    z1 = patches1 @ params.conv1_w.reshape(CONV1_FILTERS, -1).T + params.conv1_b
    a1 = np.maximum(z1, 0.0)

    # (B, rows, channels, kernel_rows) flattens channel-major like the kernel.
    patches2 = sliding_window_view(a1, KERNEL_ROWS, axis=1).reshape(batch, CONV2_ROWS, -1)
    z2 = patches2 @ params.conv2_w.reshape(CONV2_FILTERS, -1).T + params.conv2_b
    a2 = np.maximum(z2, 0.0)

    flat = a2.transpose(0, 2, 1).reshape(batch, FLAT_SIZE)
    x = np.concatenate([flat, aux], axis=1)
    z3 = x @ params.dense1_w + params.dense1_b
    h1 = np.maximum(z3, 0.0)
    z4 = h1 @ params.dense2_w + params.dense2_b
    h2 = np.maximum(z4, 0.0)
    q = h2 @ params.head_w + params.head_b

    cache = {
        "patches1": patches1, "z1": z1, "patches2": patches2, "z2": z2,
        "x": x, "z3": z3, "h1": h1, "z4": z4, "h2": h2,
    }
    return q, cache


def forward_batch(params: NetworkParams, grids: np.ndarray, aux: np.ndarray) -> np.ndarray:
    _check_inputs(grids, aux)
    q, _ = _forward_cached(params, grids, aux)
    return q


def forward(params: NetworkParams, state: StateTensor) -> np.ndarray:
    """Q-values for a single state."""
    if state.grid.shape != (GRID_ROWS, GRID_COLS) or state.aux.shape != (AUX_SIZE,):
        raise NetworkShapeError(
            f"State has grid {state.grid.shape} and aux {state.aux.shape}, "
            f"expected ({GRID_ROWS}, {GRID_COLS}) and ({AUX_SIZE},)."
        )
    return forward_batch(params, state.grid[None], state.aux[None])[0]


def _backward(params: NetworkParams, cache: Dict[str, np.ndarray], dq: np.ndarray) -> NetworkParams:
    batch = dq.shape[0]

    head_w = cache["h2"].T @ dq
    head_b = dq.sum(axis=0)
    dz4 = (dq @ params.head_w.T) * (cache["z4"] > 0)

    dense2_w = cache["h1"].T @ dz4
    dense2_b = dz4.sum(axis=0)
    dz3 = (dz4 @ params.dense2_w.T) * (cache["z3"] > 0)

    dense1_w = cache["x"].T @ dz3
    dense1_b = dz3.sum(axis=0)
    dflat = (dz3 @ params.dense1_w.T)[:, :FLAT_SIZE]

    da2 = dflat.reshape(batch, CONV2_FILTERS, CONV2_ROWS).transpose(0, 2, 1)
    dz2 = da2 * (cache["z2"] > 0)
    conv2_w = np.einsum("bpf,bpk->fk", dz2, cache["patches2"]).reshape(params.conv2_w.shape)
    conv2_b = dz2.sum(axis=(0, 1))

    dpatches2 = (dz2 @ params.conv2_w.reshape(CONV2_FILTERS, -1)).reshape(
        batch, CONV2_ROWS, CONV1_FILTERS, KERNEL_ROWS
    )
    da1 = np.zeros((batch, CONV1_ROWS, CONV1_FILTERS))
    for offset in range(KERNEL_ROWS):
        da1[:, offset:offset + CONV2_ROWS, :] += dpatches2[:, :, :, offset]
    dz1 = da1 * (cache["z1"] > 0)
    conv1_w = np.einsum("bpf,bpk->fk", dz1, cache["patches1"]).reshape(params.conv1_w.shape)
    conv1_b = dz1.sum(axis=(0, 1))

    return NetworkParams(
        conv1_w=conv1_w, conv1_b=conv1_b, conv2_w=conv2_w, conv2_b=conv2_b,
        dense1_w=dense1_w, dense1_b=dense1_b, dense2_w=dense2_w, dense2_b=dense2_b,
        head_w=head_w, head_b=head_b,
    )


def td_targets(batch: Sequence, target: NetworkParams, gamma: float) -> np.ndarray:
    """y = r for terminal transitions, else r + gamma * max_a' Q_target(s', a')."""
    if not batch:
        raise ValueError("td_targets needs a non-empty batch.")
    rewards = np.array([t.reward for t in batch], dtype=float)
    terminal = np.array([t.terminal for t in batch], dtype=bool)
    grids, aux = stack_states([t.next_state for t in batch])
    next_q = forward_batch(target, grids, aux).max(axis=1)
    return np.where(terminal, rewards, rewards + gamma * next_q)


def loss_and_gradients(
    params: NetworkParams,
    batch: Sequence,
    targets: np.ndarray,
) -> Tuple[float, NetworkParams]:
    """Mean squared TD error over the batch and its exact gradient."""
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (len(batch),):
        raise NetworkShapeError(f"Got {targets.shape[0] if targets.ndim else 0} targets for {len(batch)} transitions.")

    grids, aux = stack_states([t.state for t in batch])
    actions = np.array([int(t.action) for t in batch])
    q, cache = _forward_cached(params, grids, aux)

    rows = np.arange(len(batch))
    errors = q[rows, actions] - targets
    loss = float(np.mean(errors ** 2))
    if not np.isfinite(loss):
        raise TrainingDivergenceError(f"Loss became {loss}; training diverged.")

    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * errors / len(batch)
    return loss, _backward(params, cache, dq)
