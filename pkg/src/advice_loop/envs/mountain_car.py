"""Mountain car: classic underpowered-car-in-a-valley control task.

The car observes (position, velocity), may accelerate left/right or coast,
and receives -1 per step until the right hilltop at x = 0.6 is reached
(reward 0, terminal). Position and velocity are clamped to their ranges;
hitting the left wall zeroes the velocity.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import NamedTuple

from ..cases import MC_SCHEMA, Case
from ..rdr import ActionVocab
from .base import Transition

POS_MIN, POS_MAX = -1.2, 0.6
VEL_MIN, VEL_MAX = -0.07, 0.07
GOAL_POS = 0.6
FORCE = 0.001
GRAVITY = 0.0025
BINS = 20
N_STATES = BINS * BINS
START_LOW, START_HIGH = -0.6, -0.4
STEP_CAP = 1000

_POS_BIN = (POS_MAX - POS_MIN) / BINS
_VEL_BIN = (VEL_MAX - VEL_MIN) / BINS


class MCAction(IntEnum):
    LEFT = 0
    NOTHING = 1
    RIGHT = 2


MC_VOCAB = ActionVocab(
    tokens=("GO LEFT", "NOTHING", "GO RIGHT"),
    aliases={"DO NOTHING": 1, "LEFT": 0, "RIGHT": 2},
)


class MCState(NamedTuple):
    position: float
    velocity: float


def mc_case(state: MCState) -> Case:
    return {"position": state.position, "velocity": state.velocity}


def mc_reset(rng, start_low: float = START_LOW, start_high: float = START_HIGH) -> MCState:
    """Place the car at rest at a uniform position near the valley floor."""
    return MCState(start_low + rng.random() * (start_high - start_low), 0.0)


def mc_step(state: MCState, action: int) -> tuple[Transition, MCState]:
    v = state.velocity + FORCE * (action - 1) - GRAVITY * math.cos(3.0 * state.position)
    if v < VEL_MIN:
        v = VEL_MIN
    elif v > VEL_MAX:
        v = VEL_MAX
    x = state.position + v
    if x <= POS_MIN:
        x = POS_MIN
        v = 0.0
    terminal = x >= GOAL_POS
    if terminal:
        x = POS_MAX
    nxt = MCState(x, v)
    reward = 0.0 if terminal else -1.0
    return Transition(mc_case(state), action, reward, mc_case(nxt), terminal), nxt


def mc_discretize(state: MCState) -> int:
    """20x20 uniform binning of (position, velocity) into ids [0, 400)."""
    x, v = state
    if math.isnan(x) or math.isnan(v):
        raise ValueError("cannot discretize NaN state")
    bx = int((x - POS_MIN) / _POS_BIN)
    if bx < 0:
        bx = 0
    elif bx >= BINS:
        bx = BINS - 1
    bv = int((v - VEL_MIN) / _VEL_BIN)
    if bv < 0:
        bv = 0
    elif bv >= BINS:
        bv = BINS - 1
    return bx * BINS + bv


class MountainCarEnv:
    """Episode-oriented wrapper owning the car state and its random stream."""

    n_states = N_STATES
    n_actions = 3
    schema = MC_SCHEMA
    vocab = MC_VOCAB
    action_enum = MCAction

    def __init__(self, rng, start_low: float = START_LOW, start_high: float = START_HIGH,
                 step_cap: int = STEP_CAP):
        self.rng = rng
        self.start_low = start_low
        self.start_high = start_high
        self.step_cap = step_cap
        self.state = MCState(0.0, 0.0)
        self.state_id = 0

    def reset(self) -> Case:
        self.state = mc_reset(self.rng, self.start_low, self.start_high)
        self.state_id = mc_discretize(self.state)
        return mc_case(self.state)

    def step(self, action: int) -> Transition:
        transition, self.state = mc_step(self.state, action)
        self.state_id = mc_discretize(self.state)
        return transition
