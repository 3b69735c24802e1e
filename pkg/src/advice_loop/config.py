"""Dataclass configuration, file loading (TOML or JSON), and the named
agent/user combinations reproduced by the batch harness."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .rl import LearningParams, PPRState

SEED_ENV_VAR = "ADVICE_LOOP_SEED"
ADDR_ENV_VAR = "ADVICE_LOOP_ADDR"


class ConfigError(ValueError):
    pass


@dataclass
class EnvConfig:
    name: str = "mountain_car"  # or "driving"
    mc_start_low: float = -0.6
    mc_start_high: float = -0.4
    mc_step_cap: int = 1000
    map_path: str | None = None
    dt: float = 0.2
    car_radius: float = 1.0
    collision_mode: str = "terminate"  # or "respawn"
    start_velocity: str = "random"  # or "min"
    heading_mode: str = "longest-ray"  # or "random"
    sdc_step_cap: int = 3000
    sensor_offsets: dict | None = None

    @property
    def step_cap(self) -> int:
        return self.mc_step_cap if self.name == "mountain_car" else self.sdc_step_cap


@dataclass
class PPRConfig:
    start: float = 0.8
    decay: float = 0.05
    floor: float = 0.0
    mode: str = "subtractive"  # or "multiplicative" / "always-follow"

    def make_state(self) -> PPRState:
        return PPRState(self.start, self.decay, self.floor, self.mode)


@dataclass
class AdviceConfig:
    eval_magnitude: float = 1.0


DEFAULT_LEARNING = {
    "mountain_car": LearningParams(alpha=0.25, gamma=0.9, epsilon=0.1),
    "driving": LearningParams(alpha=0.1, gamma=0.999, epsilon=0.01),
}

AGENT_KINDS = ("UQL", "NPE", "NPI", "PE", "PI", "RDR")


@dataclass
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: str = "UQL"
    user: str | None = None
    runs: int = 100
    episodes_per_run: int = 100
    base_seed: int = 0
    learning: LearningParams | None = None
    ppr: PPRConfig = field(default_factory=PPRConfig)
    advice: AdviceConfig = field(default_factory=AdviceConfig)

    def learning_params(self) -> LearningParams:
        if self.learning is not None:
            return self.learning
        return DEFAULT_LEARNING[self.env.name]

    def validate(self) -> None:
        from .users import ALL_PROFILES, KIND_EVALUATIVE, KIND_INFORMATIVE, KIND_RULE

        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind {self.agent!r}")
        if self.env.name not in ("mountain_car", "driving"):
            raise ConfigError(f"unknown environment {self.env.name!r}")
        if self.runs < 1 or self.episodes_per_run < 1:
            raise ConfigError("runs and episodes_per_run must be positive")
        needs = {
            "UQL": None,
            "NPE": KIND_EVALUATIVE,
            "PE": KIND_EVALUATIVE,
            "NPI": KIND_INFORMATIVE,
            "PI": KIND_INFORMATIVE,
            "RDR": KIND_RULE,
        }[self.agent]
        if needs is None:
            if self.user is not None:
                raise ConfigError("unassisted agent takes no user")
            return
        if self.user is None:
            raise ConfigError(f"agent {self.agent} requires a user")
        profile = ALL_PROFILES.get(self.user)
        if profile is None:
            raise ConfigError(f"unknown user {self.user!r}")
        if profile.kind != needs:
            raise ConfigError(
                f"agent {self.agent} requires a {needs} user, got {profile.kind}")


# named combination -> (environment, agent kind, user profile)
COMBOS = {
    "UQL": ("mountain_car", "UQL", None),
    "NPE-O": ("mountain_car", "NPE", "EVALUATIVE-OPTIMISTIC"),
    "NPE-R": ("mountain_car", "NPE", "EVALUATIVE-REALISTIC"),
    "NPE-P": ("mountain_car", "NPE", "EVALUATIVE-PESSIMISTIC"),
    "NPI-O": ("mountain_car", "NPI", "INFORMATIVE-OPTIMISTIC"),
    "NPI-R": ("mountain_car", "NPI", "INFORMATIVE-REALISTIC"),
    "NPI-P": ("mountain_car", "NPI", "INFORMATIVE-PESSIMISTIC"),
    "PE-O": ("mountain_car", "PE", "EVALUATIVE-OPTIMISTIC"),
    "PE-R": ("mountain_car", "PE", "EVALUATIVE-REALISTIC"),
    "PE-P": ("mountain_car", "PE", "EVALUATIVE-PESSIMISTIC"),
    "PI-O": ("mountain_car", "PI", "INFORMATIVE-OPTIMISTIC"),
    "PI-R": ("mountain_car", "PI", "INFORMATIVE-REALISTIC"),
    "PI-P": ("mountain_car", "PI", "INFORMATIVE-PESSIMISTIC"),
    "MCP-FULL": ("mountain_car", "PI", "MCP-FULL"),
    "MCP-HALF": ("mountain_car", "PI", "MCP-HALF"),
    "MCP-QUAR": ("mountain_car", "PI", "MCP-QUAR"),
    "MCP-MID": ("mountain_car", "PI", "MCP-MID"),
    "MCRDR-FULL": ("mountain_car", "RDR", "MCRDR-FULL"),
    "MCRDR-HALF": ("mountain_car", "RDR", "MCRDR-HALF"),
    "MCRDR-QUAR": ("mountain_car", "RDR", "MCRDR-QUAR"),
    "MCRDR-MID": ("mountain_car", "RDR", "MCRDR-MID"),
    "SC-UQL": ("driving", "UQL", None),
    "SCP-AVOID": ("driving", "PI", "SCP-AVOID"),
    "SCRDR-AVOID": ("driving", "RDR", "SCRDR-AVOID"),
}

# the thirteen agent/user combinations of the persistence study
COMBO_SUITE_13 = (
    "UQL",
    "NPE-O", "NPE-R", "NPE-P",
    "NPI-O", "NPI-R", "NPI-P",
    "PE-O", "PE-R", "PE-P",
    "PI-O", "PI-R", "PI-P",
)


def apply_combo(cfg: ExperimentConfig, combo: str) -> ExperimentConfig:
    if combo not in COMBOS:
        raise ConfigError(f"unknown combo {combo!r}; known: {', '.join(sorted(COMBOS))}")
    env_name, agent, user = COMBOS[combo]
    out = replace(cfg, agent=agent, user=user, env=replace(cfg.env, name=env_name))
    out.validate()
    return out


def _build(data: dict) -> ExperimentConfig:
    env = EnvConfig(**data.get("env", {}))
    ppr = PPRConfig(**data.get("ppr", {}))
    advice = AdviceConfig(**data.get("advice", {}))
    learning = None
    if "learning" in data.get("agent", {}):
        learning = LearningParams(**data["agent"]["learning"])
    agent_section = {k: v for k, v in data.get("agent", {}).items() if k != "learning"}
    exp = data.get("experiment", {})
    user = data.get("user", {}).get("name")
    cfg = ExperimentConfig(
        env=env,
        agent=agent_section.get("kind", "UQL"),
        user=user,
        runs=exp.get("runs", 100),
        episodes_per_run=exp.get("episodes_per_run", 100),
        base_seed=exp.get("base_seed", 0),
        learning=learning,
        ppr=ppr,
        advice=advice,
    )
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Read an experiment config from a TOML or JSON file.

    Sections: ``env``, ``agent`` (with optional nested ``learning``),
    ``user``, ``ppr``, ``advice``, ``experiment``.
    """
    try:
        if str(path).endswith(".json"):
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        else:
            with open(path, "rb") as f:
                data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        return _build(data)
    except TypeError as e:
        raise ConfigError(f"bad config {path}: {e}") from e


def seed_from_env(default: int) -> int:
    value = os.environ.get(SEED_ENV_VAR)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {value!r}") from None
