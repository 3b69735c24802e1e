"""Simulated trainers.

State-based users recommend (or evaluate) the oracle action for the current
state, degraded by an accuracy knob and gated by an availability knob and a
knowledge-region rule. Rule-based users carry their own ripple-down-rules
model and hand over one of its rules whenever the model disagrees with the
agent's intended action and an undelivered applicable rule exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .cases import Case, FeatureSchema, MC_SCHEMA, SDC_SCHEMA
from .envs.driving import SDC_VOCAB, SDCAction
from .envs.mountain_car import MC_VOCAB, MCAction
from .rdr import EXPLORE, RDRTree, Rule
from .rules import parse_rule

KIND_EVALUATIVE = "evaluative"
KIND_INFORMATIVE = "informative"
KIND_RULE = "rule"


@dataclass
class AdviceEvent:
    step: int
    kind: str  # "action" | "evaluation" | "rule"
    action: int | None = None
    reward: float | None = None
    rule: Rule | None = None
    node_id: int | None = None
    counted_as_interaction: bool = True


def optimal_mc_action(case: Case) -> int:
    """Energy-pumping policy: push with the velocity, left at rest."""
    return MCAction.RIGHT if case["velocity"] > 0 else MCAction.LEFT


def sdc_avoid_action(case: Case):
    """Steer away from a blocked side; None when neither side is blocked."""
    if case["right"] or case["right-front-close"]:
        return SDCAction.TURN_LEFT
    if case["left"] or case["left-front-close"]:
        return SDCAction.TURN_RIGHT
    return None


@dataclass(frozen=True)
class UserProfile:
    name: str
    kind: str  # evaluative | informative | rule
    accuracy: float = 1.0
    availability: float = 1.0
    region_text: str = "1==1"
    knowledge_base: str | None = None  # packaged .rdr name for rule users

    def __post_init__(self):
        if self.kind not in (KIND_EVALUATIVE, KIND_INFORMATIVE, KIND_RULE):
            raise ValueError(f"unknown user kind {self.kind!r}")
        if not 0.0 <= self.accuracy <= 1.0 or not 0.0 <= self.availability <= 1.0:
            raise ValueError("accuracy and availability must lie in [0, 1]")


# accuracy/availability calibrated against a prior human trial; the
# pessimistic rows are the realistic rows halved
PROFILES = {
    "EVALUATIVE-OPTIMISTIC": UserProfile("EVALUATIVE-OPTIMISTIC", KIND_EVALUATIVE, 1.0, 1.0),
    "EVALUATIVE-REALISTIC": UserProfile("EVALUATIVE-REALISTIC", KIND_EVALUATIVE, 0.48470, 0.26860),
    "EVALUATIVE-PESSIMISTIC": UserProfile("EVALUATIVE-PESSIMISTIC", KIND_EVALUATIVE, 0.24235, 0.1343),
    "INFORMATIVE-OPTIMISTIC": UserProfile("INFORMATIVE-OPTIMISTIC", KIND_INFORMATIVE, 1.0, 1.0),
    "INFORMATIVE-REALISTIC": UserProfile("INFORMATIVE-REALISTIC", KIND_INFORMATIVE, 0.94870, 0.47316),
    "INFORMATIVE-PESSIMISTIC": UserProfile("INFORMATIVE-PESSIMISTIC", KIND_INFORMATIVE, 0.47435, 0.23658),
}

MC_HALF_REGION = "position < -0.53"
MC_QUARTER_REGION = "position < -0.53 AND position > -0.865"
MC_MIDDLE_REGION = "position < -0.43 AND position > -0.63"
# one side blocked but not both, as a disjunction of conjunctions
SC_AVOID_REGION = (
    "right AND left == false AND left-front-close == false"
    " OR right-front-close AND left == false AND left-front-close == false"
    " OR left AND right == false AND right-front-close == false"
    " OR left-front-close AND right == false AND right-front-close == false"
)

STATE_KB_PROFILES = {
    "MCP-FULL": UserProfile("MCP-FULL", KIND_INFORMATIVE),
    "MCP-HALF": UserProfile("MCP-HALF", KIND_INFORMATIVE, region_text=MC_HALF_REGION),
    "MCP-QUAR": UserProfile("MCP-QUAR", KIND_INFORMATIVE, region_text=MC_QUARTER_REGION),
    "MCP-MID": UserProfile("MCP-MID", KIND_INFORMATIVE, region_text=MC_MIDDLE_REGION),
    "SCP-AVOID": UserProfile("SCP-AVOID", KIND_INFORMATIVE, region_text=SC_AVOID_REGION),
}

RULE_KB_PROFILES = {
    "MCRDR-FULL": UserProfile("MCRDR-FULL", KIND_RULE, knowledge_base="mc_full.rdr"),
    "MCRDR-HALF": UserProfile("MCRDR-HALF", KIND_RULE, knowledge_base="mc_half.rdr"),
    "MCRDR-QUAR": UserProfile("MCRDR-QUAR", KIND_RULE, knowledge_base="mc_quarter.rdr"),
    "MCRDR-MID": UserProfile("MCRDR-MID", KIND_RULE, knowledge_base="mc_middle.rdr"),
    "SCRDR-AVOID": UserProfile("SCRDR-AVOID", KIND_RULE, knowledge_base="sc_avoid.rdr"),
}

ALL_PROFILES = PROFILES | STATE_KB_PROFILES | RULE_KB_PROFILES


def load_kb_text(name: str) -> str:
    return resources.files("advice_loop.data").joinpath(name).read_text(encoding="utf-8")


def load_kb_tree(name: str) -> RDRTree:
    if name.startswith("sc_"):
        return RDRTree.from_text(load_kb_text(name), SDC_SCHEMA, SDC_VOCAB)
    return RDRTree.from_text(load_kb_text(name), MC_SCHEMA, MC_VOCAB)


class StateUser:
    """Availability/accuracy/region-gated advisor over a per-state oracle."""

    def __init__(self, profile: UserProfile, schema: FeatureSchema, oracle,
                 n_actions: int, eval_magnitude: float = 1.0):
        self.profile = profile
        self.schema = schema
        self.oracle = oracle
        self.n_actions = n_actions
        self.eval_magnitude = eval_magnitude
        self.region = parse_rule(profile.region_text, schema)

    def _eligible(self, case: Case, rng) -> bool:
        # one availability roll per step, taken before the region check, so
        # a full-region user interacts on exactly availability of steps
        if self.profile.availability < 1.0 and rng.random() >= self.profile.availability:
            return False
        return self.region.evaluate(case)

    def advise_action(self, case: Case, state: int, persistent: bool,
                      already_advised, rng):
        """Recommended action for this step, or None when the user stays quiet."""
        if persistent and state in already_advised:
            return None
        if not self._eligible(case, rng):
            return None
        optimal = self.oracle(case)
        if optimal is None:
            return None
        if self.profile.accuracy < 1.0 and rng.random() < 1.0 - self.profile.accuracy:
            # replace with a uniformly random non-optimal action
            k = rng.randrange(self.n_actions - 1)
            return k if k < optimal else k + 1
        return int(optimal)

    def advise_evaluation(self, case: Case, state: int, action: int,
                          persistent: bool, already_advised, rng):
        """Signed supplemental reward for the action just taken, or None."""
        if persistent and (state, action) in already_advised:
            return None
        if not self._eligible(case, rng):
            return None
        optimal = self.oracle(case)
        if optimal is None:
            return None
        value = self.eval_magnitude if action == optimal else -self.eval_magnitude
        if self.profile.accuracy < 1.0 and rng.random() < 1.0 - self.profile.accuracy:
            value = -value
        return value


@dataclass
class RuleAdvice:
    rule: Rule
    action: int
    node_id: int


class RuleUser:
    """Advisor backed by its own RDR model, delivering each rule at most once.

    On every opportunity the user classifies the current state in its own
    model; if an applicable undelivered rule recommends something other than
    the agent's intended action, that rule (shallowest first, so general
    rules are taught before their exceptions) is handed over verbatim.
    """

    def __init__(self, profile: UserProfile, model: RDRTree):
        self.profile = profile
        self.model = model
        self.delivered: set[int] = set()

    @classmethod
    def from_profile(cls, profile: UserProfile) -> "RuleUser":
        return cls(profile, load_kb_tree(profile.knowledge_base))

    def advise(self, case: Case, intended_action: int):
        for node in self.model.satisfied_path(case):
            if node.conclusion is EXPLORE or node.node_id in self.delivered:
                continue
            if node.conclusion != intended_action:
                self.delivered.add(node.node_id)
                return RuleAdvice(node.rule, node.conclusion, node.node_id)
        return None

    def reset(self) -> None:
        self.delivered.clear()
