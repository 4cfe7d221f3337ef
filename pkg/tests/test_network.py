import numpy as np
import pytest

from lanechange.agent import (
    Action,
    AdamState,
    NetworkParams,
    NetworkShapeError,
    Transition,
    adam_step,
    forward,
    forward_batch,
    init_params,
    loss_and_gradients,
    td_targets,
)
from lanechange.agent.network import DENSE1_INPUTS, FLAT_SIZE, _forward_cached, stack_states
from lanechange.state_encoder import StateTensor

STEP = 1e-5
MASK_KEYS = ("z1", "z2", "z3", "z4")


def random_state(rng):
    return StateTensor(grid=rng.uniform(-1.0, 1.0, size=(45, 3)), aux=rng.uniform(0.0, 1.0, size=3))


def random_batch(rng, size):
    return [
        Transition(random_state(rng), Action(int(rng.integers(3))), float(rng.normal()), random_state(rng), False)
        for _ in range(size)
    ]


def loss_and_masks(params, batch, targets):
    grids, aux = stack_states([t.state for t in batch])
    q, cache = _forward_cached(params, grids, aux)
    actions = np.array([int(t.action) for t in batch])
    loss = np.mean((q[np.arange(len(batch)), actions] - targets) ** 2)
    return loss, [cache[key] > 0 for key in MASK_KEYS]


def test_flattened_sizes():
    assert FLAT_SIZE == 32 * 41
    assert DENSE1_INPUTS == 1315


def test_zero_parameters_give_zero_q():
    state = random_state(np.random.default_rng(0))
    assert np.array_equal(forward(NetworkParams.zeros(), state), np.zeros(3))


def test_forward_is_deterministic():
    state = random_state(np.random.default_rng(1))
    a = forward(init_params(np.random.default_rng(3)), state)
    b = forward(init_params(np.random.default_rng(3)), state)
    assert np.array_equal(a, b)
    assert a.shape == (3,)


def test_batch_rows_match_single_forward():
    rng = np.random.default_rng(2)
    params = init_params(rng)
    states = [random_state(rng) for _ in range(4)]
    grids, aux = stack_states(states)
    batch_q = forward_batch(params, grids, aux)
    for row, state in zip(batch_q, states):
        assert np.allclose(row, forward(params, state))


def test_bad_shapes_are_rejected():
    params = NetworkParams.zeros()
    with pytest.raises(NetworkShapeError):
        forward(params, StateTensor(grid=np.ones((44, 3)), aux=np.ones(3)))
    with pytest.raises(NetworkShapeError):
        NetworkParams(**{**{n: np.zeros(s) for n, s in NetworkParams.SHAPES.items()}, "head_b": np.zeros(4)})


def test_gradients_match_finite_differences():
    """Central differences on parameters whose ReLU pattern stays put."""
    rng = np.random.default_rng(123)
    per_tensor = 25
    for _ in range(50):
        params = init_params(rng)
        params.conv1_b += rng.normal(scale=0.1, size=params.conv1_b.shape)
        params.dense1_b += rng.normal(scale=0.1, size=params.dense1_b.shape)
        batch = random_batch(rng, 2)
        targets = rng.uniform(-2.0, 2.0, size=2)
        _, grads = loss_and_gradients(params, batch, targets)

        checked = 0
        for name, value in params.items():
            flat = value.reshape(-1)
            analytic = getattr(grads, name).reshape(-1)
            picks = rng.choice(flat.size, size=min(per_tensor, flat.size), replace=False)
            for index in picks:
                original = flat[index]
                flat[index] = original + STEP
                plus, plus_masks = loss_and_masks(params, batch, targets)
                flat[index] = original - STEP
                minus, minus_masks = loss_and_masks(params, batch, targets)
                flat[index] = original
                if any(not np.array_equal(a, b) for a, b in zip(plus_masks, minus_masks)):
                    continue  # straddles a ReLU kink
                numeric = (plus - minus) / (2 * STEP)
                error = abs(numeric - analytic[index]) / max(abs(numeric) + abs(analytic[index]), 1e-4)
                assert error < 1e-4, f"{name}[{index}]: analytic {analytic[index]}, numeric {numeric}"
                checked += 1
        assert checked >= 200


def test_td_targets():
    target = NetworkParams.zeros()
    target.head_b = np.array([2.0, 1.0, 0.0])
    rng = np.random.default_rng(0)
    live = Transition(random_state(rng), Action.KEEP_LANE, 1.0, random_state(rng), False)
    dead = Transition(random_state(rng), Action.KEEP_LANE, -10.0, random_state(rng), True)
    assert td_targets([live, dead], target, 0.95) == pytest.approx([2.9, -10.0])
    assert td_targets([live], target, 0.0) == pytest.approx([1.0])
    with pytest.raises(ValueError):
        td_targets([], target, 0.95)


def test_loss_vanishes_at_targets():
    rng = np.random.default_rng(4)
    params = init_params(rng)
    batch = random_batch(rng, 5)
    grids, aux = stack_states([t.state for t in batch])
    q = forward_batch(params, grids, aux)
    targets = q[np.arange(5), [int(t.action) for t in batch]]
    loss, grads = loss_and_gradients(params, batch, targets)
    assert loss == 0.0
    assert all(not np.any(value) for _, value in grads.items())


def test_duplicating_the_batch_keeps_the_loss():
    rng = np.random.default_rng(6)
    params = init_params(rng)
    batch = random_batch(rng, 3)
    targets = rng.normal(size=3)
    single, _ = loss_and_gradients(params, batch, targets)
    double, _ = loss_and_gradients(params, batch + batch, np.concatenate([targets, targets]))
    assert double == pytest.approx(single)


def test_target_count_must_match_batch():
    rng = np.random.default_rng(7)
    with pytest.raises(NetworkShapeError):
        loss_and_gradients(init_params(rng), random_batch(rng, 3), np.zeros(2))


def test_adam_fits_a_small_regression_set():
    rng = np.random.default_rng(8)
    params = init_params(rng)
    states = [random_state(rng) for _ in range(16)]
    batch = [Transition(s, Action(a), 0.0, s, True) for s in states for a in range(3)]
    targets = rng.uniform(-1.0, 1.0, size=len(batch))
    adam = AdamState()
    first, _ = loss_and_gradients(params, batch, targets)
    for _ in range(2000):
        loss, grads = loss_and_gradients(params, batch, targets)
        params = adam_step(params, grads, adam, 1e-3)
    assert loss < 1e-3 < first
