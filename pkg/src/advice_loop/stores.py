"""Flat retention stores for state-based trainer advice.

Both stores are write-once per key: the first piece of advice wins and
later writes are reported as not stored. This mirrors a trainer that is
never asked twice about the same state (or state-action pair).
"""

from __future__ import annotations


class StateAdviceStore:
    """Retained action recommendations, keyed by discrete state id."""

    def __init__(self):
        self._actions = {}

    def store(self, state: int, action: int) -> bool:
        if state in self._actions:
            return False
        self._actions[state] = action
        return True

    def recall(self, state: int):
        return self._actions.get(state)

    def __contains__(self, state: int) -> bool:
        return state in self._actions

    def __len__(self) -> int:
        return len(self._actions)

    def items(self):
        return self._actions.items()


class EvalAdviceStore:
    """Retained signed supplemental rewards, keyed by (state id, action)."""

    def __init__(self):
        self._rewards = {}

    def store(self, state: int, action: int, reward: float) -> bool:
        key = (state, action)
        if key in self._rewards:
            return False
        self._rewards[key] = reward
        return True

    def recall(self, state: int, action: int):
        return self._rewards.get((state, action))

    def __contains__(self, key) -> bool:
        return key in self._rewards

    def __len__(self) -> int:
        return len(self._rewards)

    def items(self):
        return self._rewards.items()
