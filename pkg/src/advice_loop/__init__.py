"""Persistent rule-based interactive reinforcement learning.

Tabular Q-learning agents that retain trainer advice (state lookups and
ripple-down-rules trees), reuse it via probabilistic policy reuse, and can
be advised either by configurable simulated trainers or by a live human
through a session protocol.
"""

from .cases import Case, FeatureSchema, MC_SCHEMA, SDC_SCHEMA, case_diff
from .rdr import EXPLORE, RDRTree, RuleRejected
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
from .rules import MissingFeature, ParseError, Rule, UnknownFeature, eval_rule, parse_rule
from .stores import EvalAdviceStore, StateAdviceStore

__version__ = "0.1.0"

__all__ = [
    "Case",
    "FeatureSchema",
    "MC_SCHEMA",
    "SDC_SCHEMA",
    "case_diff",
    "EXPLORE",
    "RDRTree",
    "RuleRejected",
    "ActionChoice",
    "LearningParams",
    "PPRState",
    "QTable",
    "epsilon_greedy",
    "ppr_decay",
    "ppr_select",
    "q_update",
    "MissingFeature",
    "ParseError",
    "Rule",
    "UnknownFeature",
    "eval_rule",
    "parse_rule",
    "EvalAdviceStore",
    "StateAdviceStore",
    "__version__",
]
