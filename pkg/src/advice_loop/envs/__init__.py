from .base import RespawnExhausted, Transition
from .driving import (
    DrivingEnv,
    ObstacleMap,
    Pose,
    SDCAction,
    default_map,
    sdc_decode,
    sdc_encode,
    sdc_reset,
    sdc_respawn,
    sdc_sense,
    sdc_step,
)
from .mountain_car import (
    MCAction,
    MCState,
    MountainCarEnv,
    mc_discretize,
    mc_reset,
    mc_step,
)

__all__ = [
    "RespawnExhausted",
    "Transition",
    "DrivingEnv",
    "ObstacleMap",
    "Pose",
    "SDCAction",
    "default_map",
    "sdc_decode",
    "sdc_encode",
    "sdc_reset",
    "sdc_respawn",
    "sdc_sense",
    "sdc_step",
    "MCAction",
    "MCState",
    "MountainCarEnv",
    "mc_discretize",
    "mc_reset",
    "mc_step",
]
