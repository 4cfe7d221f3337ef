import numpy as np
import pytest

from lanechange.agent import (
    Action,
    DQNAgent,
    TrainConfig,
    Transition,
    eps_after,
    forward,
    init_params,
    sync_target,
)
from lanechange.state_encoder import StateTensor

GAMMA = 0.5

# Two-state MDP: (reward, next state) for each state and action. Action 2 is
# strictly dominated so bootstrapping over all three heads stays meaningful.
MDP = {
    0: {0: (0.0, 1), 1: (0.25, 0), 2: (-1.0, 0)},
    1: {0: (1.5, 0), 1: (0.0, 1), 2: (-1.0, 1)},
}


def _tabular_state(index):
    grid = np.ones((45, 3))
    if index == 1:
        grid[28:32, 1] = 0.5
    aux = np.array([0.2, 1.0, 1.0]) if index == 0 else np.array([0.8, 0.0, 1.0])
    return StateTensor(grid=grid, aux=aux)


STATES = [_tabular_state(0), _tabular_state(1)]


def value_iteration(tol=1e-12):
    q = np.zeros((2, 3))
    while True:
        v = q.max(axis=1)
        new = np.array([[MDP[s][a][0] + GAMMA * v[MDP[s][a][1]] for a in range(3)] for s in range(2)])
        if np.max(np.abs(new - q)) < tol:
            return new
        q = new


def dummy_transition(rng, reward=0.0):
    state = StateTensor(grid=rng.uniform(-1, 1, (45, 3)), aux=rng.uniform(0, 1, 3))
    return Transition(state, Action(int(rng.integers(3))), reward, state, False)


def test_value_iteration_oracle():
    q = value_iteration()
    assert q[0] == pytest.approx([1.0, 0.75, -0.5])
    assert q[1] == pytest.approx([2.0, 1.0, 0.0])


def test_sync_target_is_a_frozen_copy():
    params = init_params(np.random.default_rng(0))
    target = sync_target(params)
    assert target.identical_to(params)
    state = STATES[0]
    before = forward(target, state)
    params.head_b += 1.0
    assert np.array_equal(forward(target, state), before)


def test_gradient_steps_and_target_syncs():
    cfg = TrainConfig(batch_size=2, buffer_capacity=10, target_sync_every=3)
    agent = DQNAgent(cfg, rng=np.random.default_rng(1))
    rng = np.random.default_rng(2)

    assert agent.observe(dummy_transition(rng)) is None
    assert agent.grad_steps == 0
    for expected in range(1, 8):
        loss = agent.observe(dummy_transition(rng, reward=float(expected)))
        assert loss is not None and np.isfinite(loss)
        assert agent.grad_steps == expected
        assert agent.target_syncs == expected // 3
        assert agent.target.identical_to(agent.params) == (expected % 3 == 0)
    assert agent.decision_steps == 8
    assert agent.eps == pytest.approx(eps_after(8, cfg))


def test_greedy_act_leaves_rng_alone():
    agent = DQNAgent(TrainConfig(), rng=np.random.default_rng(3))
    before = agent.rng.bit_generator.state
    action, q = agent.act(STATES[0], greedy=True)
    assert action == int(np.argmax(q))
    assert agent.rng.bit_generator.state == before


def test_restore_round_trip():
    cfg = TrainConfig(batch_size=2, buffer_capacity=10, target_sync_every=2)
    agent = DQNAgent(cfg, rng=np.random.default_rng(4))
    rng = np.random.default_rng(5)
    for _ in range(5):
        agent.observe(dummy_transition(rng))
    state = agent.training_state(episodes_done=3)

    resumed = DQNAgent(cfg, rng=np.random.default_rng(6), params=agent.snapshot())
    resumed.restore(state)
    assert resumed.eps == agent.eps
    assert resumed.grad_steps == agent.grad_steps == 4
    assert resumed.adam.step == 4
    assert resumed.target.identical_to(agent.target)
    assert resumed.target_syncs == 2
    assert len(resumed.replay) == 0


@pytest.mark.parametrize("seed", range(10))
def test_learns_the_tabular_optimum(seed):
    cfg = TrainConfig(gamma=GAMMA, lr=1e-3, batch_size=6, buffer_capacity=6, target_sync_every=50)
    agent = DQNAgent(cfg, rng=np.random.default_rng(seed))
    for s in range(2):
        for a in range(3):
            reward, nxt = MDP[s][a]
            agent.replay.push(Transition(STATES[s], Action(a), reward, STATES[nxt], False))

    for _ in range(3000):
        agent.learn()

    oracle = value_iteration()
    for s in range(2):
        q = forward(agent.params, STATES[s])
        assert int(np.argmax(q)) == int(np.argmax(oracle[s]))
        assert q == pytest.approx(oracle[s], abs=0.2)
