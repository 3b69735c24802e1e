"""Tabular Q-learning with epsilon-greedy exploration and probabilistic
policy reuse (PPR).

PPR arbitrates among three action sources each step: fresh trainer advice
(always followed on the step it is given), retained advice (followed with a
per-episode decaying probability), and the agent's own epsilon-greedy
policy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

SOURCE_FRESH = "fresh_advice"
SOURCE_RETAINED = "retained_advice"
SOURCE_GREEDY = "greedy"
SOURCE_RANDOM = "random"

PPR_SUBTRACTIVE = "subtractive"
PPR_MULTIPLICATIVE = "multiplicative"
PPR_ALWAYS_FOLLOW = "always-follow"

_FLOOR_DUST = 1e-12  # snap accumulated float error at the floor


class ActionChoice(NamedTuple):
    action: int
    source: str


@dataclass
class LearningParams:
    alpha: float
    gamma: float
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma {self.gamma} outside [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")


class QTable:
    """Dense state x action table of expected-reward estimates, zero-initialized."""

    def __init__(self, n_states: int, n_actions: int):
        self.n_states = n_states
        self.n_actions = n_actions
        self.values = [[0.0] * n_actions for _ in range(n_states)]

    def row(self, state: int) -> list[float]:
        if not 0 <= state < self.n_states:
            raise IndexError(f"state {state} out of range")
        return self.values[state]

    def copy(self) -> "QTable":
        out = QTable(self.n_states, self.n_actions)
        out.values = [row[:] for row in self.values]
        return out


def q_update(q: QTable, state: int, action: int, reward: float,
             next_state: int | None, params: LearningParams) -> None:
    """One Q-learning backup; ``next_state=None`` marks a terminal transition."""
    if not 0 <= state < q.n_states:
        raise IndexError(f"state {state} out of range")
    if not 0 <= action < q.n_actions:
        raise IndexError(f"action {action} out of range")
    row = q.values[state]
    target = reward
    if next_state is not None:
        if not 0 <= next_state < q.n_states:
            raise IndexError(f"state {next_state} out of range")
        target += params.gamma * max(q.values[next_state])
    row[action] += params.alpha * (target - row[action])


def argmax_random_tie(row, rng) -> int:
    """Index of the maximum, ties broken uniformly at random."""
    best = max(row)
    first = row.index(best)
    n = row.count(best)
    if n == 1:
        return first
    k = rng.randrange(n)
    i = first
    while k:
        i += 1
        if row[i] == best:
            k -= 1
    return i


def epsilon_greedy(q: QTable, state: int, epsilon: float, rng) -> ActionChoice:
    if not 0 <= state < q.n_states:
        raise IndexError(f"state {state} out of range")
    if epsilon > 0.0 and rng.random() < epsilon:
        return ActionChoice(rng.randrange(q.n_actions), SOURCE_RANDOM)
    return ActionChoice(argmax_random_tie(q.values[state], rng), SOURCE_GREEDY)


@dataclass
class PPRState:
    """Probability of reusing retained advice, decayed once per episode."""

    p_reuse: float = 0.8
    decay_per_episode: float = 0.05
    floor: float = 0.0
    mode: str = PPR_SUBTRACTIVE

    def __post_init__(self):
        if self.mode not in (PPR_SUBTRACTIVE, PPR_MULTIPLICATIVE, PPR_ALWAYS_FOLLOW):
            raise ValueError(f"unknown PPR mode {self.mode!r}")

    def probability(self) -> float:
        if self.mode == PPR_ALWAYS_FOLLOW:
            return 1.0
        return self.p_reuse


def ppr_decay(ppr: PPRState) -> None:
    """Apply the per-episode decay; call exactly once at each episode boundary."""
    if ppr.mode == PPR_ALWAYS_FOLLOW:
        return
    if ppr.mode == PPR_MULTIPLICATIVE:
        p = ppr.p_reuse * (1.0 - ppr.decay_per_episode)
    else:
        p = ppr.p_reuse - ppr.decay_per_episode
    if p < ppr.floor + _FLOOR_DUST:
        p = ppr.floor
    ppr.p_reuse = p


def ppr_select(state: int, retained: int | None, fresh: int | None, q: QTable,
               params: LearningParams, ppr: PPRState | None, rng) -> ActionChoice:
    """Arbitrate fresh advice, retained advice, and the default policy.

    Fresh advice is always followed. Retained advice is followed with the
    PPR probability; otherwise (and when no advice exists) the choice falls
    through to epsilon-greedy.
    """
    if fresh is not None:
        return ActionChoice(fresh, SOURCE_FRESH)
    if retained is not None and ppr is not None:
        if rng.random() < ppr.probability():
            return ActionChoice(retained, SOURCE_RETAINED)
    return epsilon_greedy(q, state, params.epsilon, rng)


def write_qtable_csv(q: QTable, path, action_names=None) -> None:
    """Snapshot export: one (state_id, action, value) row per table entry."""
    names = action_names or [str(a) for a in range(q.n_actions)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["state_id", "action", "value"])
        for s in range(q.n_states):
            row = q.values[s]
            for a in range(q.n_actions):
                writer.writerow([s, names[a], repr(row[a])])


def qtable_rows(q: QTable, action_names=None):
    names = action_names or [str(a) for a in range(q.n_actions)]
    for s in range(q.n_states):
        for a in range(q.n_actions):
            yield s, names[a], q.values[s][a]
