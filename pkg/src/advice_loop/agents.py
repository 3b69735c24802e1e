"""Learning agents: unassisted Q-learning plus the advice-taking variants.

Persistence is what distinguishes the variants: persistent agents retain
advice (a per-state action table, a per-state-action evaluation table, or an
RDR rule tree) and replay it under PPR; non-persistent agents use advice on
the step it arrives and forget it.
"""

from __future__ import annotations

from .cases import Case
from .rdr import EXPLORE, RDRTree, Rule
from .rl import (
    ActionChoice,
    LearningParams,
    PPRState,
    QTable,
    epsilon_greedy,
    ppr_decay,
    ppr_select,
    q_update,
)
from .stores import EvalAdviceStore, StateAdviceStore

_NO_KEYS = frozenset()


class Agent:
    """Unassisted epsilon-greedy Q-learner; base for the advised variants."""

    kind = "UQL"
    persistent = False
    evaluative = False

    def __init__(self, n_states: int, n_actions: int, params: LearningParams,
                 rng, ppr: PPRState | None = None):
        self.q = QTable(n_states, n_actions)
        self.params = params
        self.rng = rng
        self.ppr = ppr

    @property
    def advised_keys(self):
        return _NO_KEYS

    def retained_action(self, state: int, case: Case):
        return None

    def select_intended(self, state: int, case: Case) -> ActionChoice:
        retained = self.retained_action(state, case)
        if retained is None:
            return epsilon_greedy(self.q, state, self.params.epsilon, self.rng)
        return ppr_select(state, retained, None, self.q, self.params, self.ppr, self.rng)

    def receive_action_advice(self, state: int, case: Case, action: int) -> None:
        pass

    def receive_evaluation(self, state: int, action: int, value: float) -> None:
        pass

    def retained_evaluation(self, state: int, action: int):
        return 0.0, False

    def update(self, state: int, action: int, reward: float, next_state: int | None) -> None:
        q_update(self.q, state, action, reward, next_state, self.params)

    def end_episode(self) -> None:
        if self.ppr is not None:
            ppr_decay(self.ppr)


class InformativeAgent(Agent):
    """Takes action recommendations; the persistent variant retains them."""

    def __init__(self, n_states, n_actions, params, rng, ppr=None, persistent=False):
        super().__init__(n_states, n_actions, params, rng, ppr if persistent else None)
        self.persistent = persistent
        self.kind = "PI" if persistent else "NPI"
        self.store = StateAdviceStore() if persistent else None

    @property
    def advised_keys(self):
        return self.store if self.persistent else _NO_KEYS

    def retained_action(self, state, case):
        if self.store is not None:
            return self.store.recall(state)
        return None

    def receive_action_advice(self, state, case, action):
        if self.store is not None:
            self.store.store(state, action)


class EvaluativeAgent(Agent):
    """Takes supplemental rewards; the persistent variant replays them under PPR."""

    evaluative = True

    def __init__(self, n_states, n_actions, params, rng, ppr=None, persistent=False):
        super().__init__(n_states, n_actions, params, rng, ppr if persistent else None)
        self.persistent = persistent
        self.kind = "PE" if persistent else "NPE"
        self.store = EvalAdviceStore() if persistent else None

    @property
    def advised_keys(self):
        return self.store if self.persistent else _NO_KEYS

    def receive_evaluation(self, state, action, value):
        if self.store is not None:
            self.store.store(state, action, value)

    def retained_evaluation(self, state, action):
        if self.store is None:
            return 0.0, False
        value = self.store.recall(state, action)
        if value is None:
            return 0.0, False
        if self.rng.random() < self.ppr.probability():
            return value, True
        return 0.0, False


class RdrAgent(Agent):
    """Models rule advice in its own RDR tree and reuses it under PPR."""

    kind = "RDR"
    persistent = True

    def __init__(self, n_states, n_actions, params, rng, ppr, schema, vocab):
        super().__init__(n_states, n_actions, params, rng, ppr)
        self.tree = RDRTree(schema, vocab)

    def retained_action(self, state, case):
        conclusion, _, _ = self.tree.classify(case)
        return None if conclusion is EXPLORE else conclusion

    def receive_rule_advice(self, case: Case, rule: Rule, action: int) -> None:
        _, _, insertion = self.tree.classify(case)
        self.tree.insert(insertion, rule, action, case)


class InteractiveAgent(RdrAgent):
    """Live-session agent: retains rules, per-state actions, and evaluations.

    A state-exact retained recommendation takes precedence over the rule
    tree; both are replayed under the same PPR state.
    """

    kind = "INTERACTIVE"
    evaluative = True

    def __init__(self, n_states, n_actions, params, rng, ppr, schema, vocab):
        super().__init__(n_states, n_actions, params, rng, ppr, schema, vocab)
        self.store = StateAdviceStore()
        self.eval_store = EvalAdviceStore()

    @property
    def advised_keys(self):
        return self.store

    def retained_action(self, state, case):
        stored = self.store.recall(state)
        if stored is not None:
            return stored
        return super().retained_action(state, case)

    def receive_action_advice(self, state, case, action):
        self.store.store(state, action)

    def receive_evaluation(self, state, action, value):
        self.eval_store.store(state, action, value)

    def retained_evaluation(self, state, action):
        value = self.eval_store.recall(state, action)
        if value is None:
            return 0.0, False
        if self.rng.random() < self.ppr.probability():
            return value, True
        return 0.0, False


def make_agent(kind: str, n_states: int, n_actions: int, params: LearningParams,
               rng, ppr: PPRState | None, schema=None, vocab=None) -> Agent:
    if kind == "UQL":
        return Agent(n_states, n_actions, params, rng)
    if kind == "NPI":
        return InformativeAgent(n_states, n_actions, params, rng, persistent=False)
    if kind == "PI":
        return InformativeAgent(n_states, n_actions, params, rng, ppr, persistent=True)
    if kind == "NPE":
        return EvaluativeAgent(n_states, n_actions, params, rng, persistent=False)
    if kind == "PE":
        return EvaluativeAgent(n_states, n_actions, params, rng, ppr, persistent=True)
    if kind == "RDR":
        return RdrAgent(n_states, n_actions, params, rng, ppr, schema, vocab)
    if kind == "INTERACTIVE":
        return InteractiveAgent(n_states, n_actions, params, rng, ppr, schema, vocab)
    raise ValueError(f"unknown agent kind {kind!r}")
