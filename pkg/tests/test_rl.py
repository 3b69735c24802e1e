import csv
import random

import pytest
from hypothesis import given, strategies as st

from advice_loop.rl import (
    LearningParams,
    PPRState,
    QTable,
    SOURCE_FRESH,
    SOURCE_GREEDY,
    SOURCE_RANDOM,
    SOURCE_RETAINED,
    epsilon_greedy,
    ppr_decay,
    ppr_select,
    q_update,
    write_qtable_csv,
)

CHI2_99_9_DF2 = 13.816  # chi-squared critical value, df=2, p=0.999


# -- chain MDP oracle -----------------------------------------------------
#
# Five states in a row; action 1 moves right (terminal past state 3 with
# reward 0), action 0 moves left (floored at 0). Every step costs -1.

N_CHAIN = 5
GOAL = N_CHAIN - 1


def chain_step(state, action):
    if action == 1:
        nxt = state + 1
        if nxt == GOAL:
            return None, 0.0
        return nxt, -1.0
    return max(state - 1, 0), -1.0


def value_iteration_oracle(gamma, tol=1e-12):
    """Independent fixed point of the Bellman optimality equations."""
    q = [[0.0, 0.0] for _ in range(GOAL)]
    while True:
        delta = 0.0
        for s in range(GOAL):
            for a in (0, 1):
                nxt, r = chain_step(s, a)
                target = r if nxt is None else r + gamma * max(q[nxt])
                delta = max(delta, abs(target - q[s][a]))
                q[s][a] = target
        if delta < tol:
            return q


def run_chain_q_learning(steps=10_000, alpha=0.25, gamma=0.9, seed=13):
    params = LearningParams(alpha=alpha, gamma=gamma, epsilon=1.0)
    q = QTable(GOAL, 2)
    rng = random.Random(seed)
    state = 0
    for _ in range(steps):
        action = rng.randrange(2)
        nxt, reward = chain_step(state, action)
        q_update(q, state, action, reward, nxt, params)
        state = 0 if nxt is None else nxt
    return q


def test_q_learning_matches_value_iteration_within_1e3():
    q = run_chain_q_learning()
    oracle = value_iteration_oracle(0.9)
    for s in range(GOAL):
        for a in (0, 1):
            assert q.values[s][a] == pytest.approx(oracle[s][a], abs=1e-3)


def test_chain_q_values_respect_reward_bound():
    q = run_chain_q_learning()
    bound = 1.0 / (1.0 - 0.9) + 1.0
    assert all(abs(v) <= bound for row in q.values for v in row)


# -- q_update basics ------------------------------------------------------


def test_single_update_from_zero_table():
    q = QTable(4, 3)
    q_update(q, 1, 2, -1.0, 3, LearningParams(0.25, 0.9, 0.1))
    assert q.values[1][2] == pytest.approx(-0.25)


def test_zero_alpha_leaves_table_unchanged():
    q = QTable(4, 3)
    q.values[1][2] = 0.5
    q_update(q, 1, 2, -1.0, 3, LearningParams(0.0, 0.9, 0.1))
    assert q.values[1][2] == 0.5


def test_terminal_contributes_no_bootstrap():
    q = QTable(2, 2)
    q.values[1][0] = 100.0
    q_update(q, 0, 0, -1.0, None, LearningParams(0.5, 0.9, 0.0))
    assert q.values[0][0] == pytest.approx(-0.5)


def test_update_rejects_out_of_range_indices():
    q = QTable(2, 2)
    params = LearningParams(0.5, 0.9, 0.0)
    with pytest.raises(IndexError):
        q_update(q, 2, 0, 0.0, None, params)
    with pytest.raises(IndexError):
        q_update(q, -1, 0, 0.0, None, params)
    with pytest.raises(IndexError):
        q_update(q, 0, 5, 0.0, None, params)


def test_learning_params_validated():
    with pytest.raises(ValueError):
        LearningParams(1.5, 0.9, 0.1)
    with pytest.raises(ValueError):
        LearningParams(0.5, -0.1, 0.1)
    with pytest.raises(ValueError):
        LearningParams(0.5, 0.9, 2.0)


# -- epsilon-greedy -------------------------------------------------------


def test_pure_greedy_with_distinct_values():
    q = QTable(1, 3)
    q.values[0] = [1.0, 0.0, -1.0]
    rng = random.Random(0)
    for _ in range(100):
        choice = epsilon_greedy(q, 0, 0.0, rng)
        assert choice.action == 0
        assert choice.source == SOURCE_GREEDY


def test_full_exploration_is_uniform():
    q = QTable(1, 3)
    q.values[0] = [1.0, 0.0, -1.0]
    rng = random.Random(1)
    n = 100_000
    counts = [0, 0, 0]
    for _ in range(n):
        choice = epsilon_greedy(q, 0, 1.0, rng)
        assert choice.source == SOURCE_RANDOM
        counts[choice.action] += 1
    for c in counts:
        assert abs(c / n - 1 / 3) < 0.02


def test_all_equal_values_uniform_regardless_of_epsilon():
    q = QTable(1, 3)
    for eps in (0.0, 0.3, 1.0):
        rng = random.Random(2)
        n = 30_000
        counts = [0, 0, 0]
        for _ in range(n):
            counts[epsilon_greedy(q, 0, eps, rng).action] += 1
        for c in counts:
            assert abs(c / n - 1 / 3) < 0.02


@given(st.lists(st.floats(-5, 5, width=16), min_size=2, max_size=5),
       st.floats(-3, 3, width=16), st.integers(0, 2**16))
def test_greedy_invariant_under_constant_shift(row, shift, seed):
    q1 = QTable(1, len(row))
    q1.values[0] = list(row)
    q2 = QTable(1, len(row))
    q2.values[0] = [v + shift for v in row]
    c1 = epsilon_greedy(q1, 0, 0.0, random.Random(seed))
    c2 = epsilon_greedy(q2, 0, 0.0, random.Random(seed))
    assert c1 == c2


# -- PPR ------------------------------------------------------------------


def test_fresh_advice_always_taken_even_at_zero_reuse():
    q = QTable(1, 3)
    params = LearningParams(0.25, 0.9, 0.1)
    ppr = PPRState(p_reuse=0.0)
    rng = random.Random(3)
    before = rng.getstate()
    choice = ppr_select(0, 1, 2, q, params, ppr, rng)
    assert choice.action == 2
    assert choice.source == SOURCE_FRESH
    assert rng.getstate() == before  # no randomness consumed


def test_no_advice_is_stream_identical_to_epsilon_greedy():
    q = QTable(1, 3)
    q.values[0] = [0.3, 0.1, 0.2]
    params = LearningParams(0.25, 0.9, 0.37)
    a = [ppr_select(0, None, None, q, params, PPRState(), random.Random(5))
         for _ in range(1)]
    rng1, rng2 = random.Random(6), random.Random(6)
    for _ in range(5_000):
        assert ppr_select(0, None, None, q, params, PPRState(), rng1) == \
            epsilon_greedy(q, 0, params.epsilon, rng2)


def test_no_advice_frequencies_match_epsilon_greedy_chi_squared():
    q = QTable(1, 3)
    q.values[0] = [0.3, 0.1, 0.2]
    eps = 0.3
    params = LearningParams(0.25, 0.9, eps)
    rng = random.Random(7)
    n = 100_000
    counts = [0, 0, 0]
    for _ in range(n):
        counts[ppr_select(0, None, None, q, params, None, rng).action] += 1
    expected = [n * (1 - eps + eps / 3), n * eps / 3, n * eps / 3]
    chi2 = sum((c - e) ** 2 / e for c, e in zip(counts, expected))
    assert chi2 < CHI2_99_9_DF2


def test_retained_advice_frequency_matches_p_reuse():
    q = QTable(1, 3)
    q.values[0] = [1.0, 0.0, 0.0]  # greedy prefers 0; retained recommends 2
    params = LearningParams(0.25, 0.9, 0.1)
    ppr = PPRState(p_reuse=0.8)
    rng = random.Random(8)
    n = 100_000
    retained = 0
    for _ in range(n):
        choice = ppr_select(0, 2, None, q, params, ppr, rng)
        if choice.source == SOURCE_RETAINED:
            assert choice.action == 2
            retained += 1
    assert abs(retained / n - 0.8) < 0.02


def test_decay_sequence_hits_zero_at_episode_16():
    ppr = PPRState(p_reuse=0.8, decay_per_episode=0.05, floor=0.0)
    ppr_decay(ppr)
    assert ppr.p_reuse == pytest.approx(0.75)
    for _ in range(15):
        ppr_decay(ppr)
    assert ppr.p_reuse == 0.0
    ppr_decay(ppr)
    assert ppr.p_reuse == 0.0


def test_zero_decay_is_noop():
    ppr = PPRState(p_reuse=0.8, decay_per_episode=0.0)
    for _ in range(10):
        ppr_decay(ppr)
    assert ppr.p_reuse == 0.8


def test_multiplicative_decay_mode():
    ppr = PPRState(p_reuse=0.8, decay_per_episode=0.05, mode="multiplicative")
    ppr_decay(ppr)
    assert ppr.p_reuse == pytest.approx(0.76)


def test_always_follow_mode_never_decays():
    ppr = PPRState(p_reuse=0.8, mode="always-follow")
    assert ppr.probability() == 1.0
    ppr_decay(ppr)
    assert ppr.probability() == 1.0


@given(st.floats(0, 1), st.floats(0, 0.3), st.floats(0, 0.5), st.integers(1, 40))
def test_p_reuse_non_increasing_and_floored(start, decay, floor, episodes):
    if start < floor:
        start = floor
    ppr = PPRState(p_reuse=start, decay_per_episode=decay, floor=floor)
    previous = ppr.p_reuse
    for _ in range(episodes):
        ppr_decay(ppr)
        assert ppr.p_reuse <= previous + 1e-12
        assert ppr.p_reuse >= floor
        previous = ppr.p_reuse


# -- export ---------------------------------------------------------------


def test_qtable_csv_export(tmp_path):
    q = QTable(2, 2)
    q.values[0][1] = -0.125
    path = tmp_path / "q.csv"
    write_qtable_csv(q, path, action_names=["LEFT", "RIGHT"])
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["state_id", "action", "value"]
    assert len(rows) == 5
    assert rows[1] == ["0", "LEFT", "0.0"]
    assert rows[2] == ["0", "RIGHT", "-0.125"]
