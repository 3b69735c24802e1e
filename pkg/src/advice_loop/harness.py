"""Batch experiment runner: seeded runs, per-episode metrics, CSV output.

One experiment is ``runs`` independent repetitions; each repetition resets
the environment, the agent, and the agent's advice model, then runs
``episodes_per_run`` episodes. An interaction is counted only when the user
actively provides advice, never when the agent replays retained advice.
"""

from __future__ import annotations

import csv
import hashlib
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .agents import Agent, make_agent
from .config import ExperimentConfig
from .envs.driving import DrivingEnv, ObstacleMap, default_map
from .envs.mountain_car import MountainCarEnv
from .rl import SOURCE_FRESH, SOURCE_RETAINED, ActionChoice
from .users import (
    ALL_PROFILES,
    KIND_RULE,
    RuleUser,
    StateUser,
    optimal_mc_action,
    sdc_avoid_action,
)

METRICS_HEADER = ("run", "episode", "steps", "reward", "interactions", "retained_uses")
SUMMARY_HEADER = ("agent", "user", "interactions", "interaction_pct")


@dataclass
class EpisodeMetrics:
    run: int
    episode: int
    steps: int
    reward: float
    interactions: int
    retained_uses: int


@dataclass
class RunSummary:
    agent: str
    user: str | None
    runs: int
    episodes_per_run: int
    episode_steps_mean: list
    episode_steps_std: list
    episode_reward_mean: list
    episode_reward_std: list
    total_steps: int
    total_interactions: int
    total_retained_uses: int

    @property
    def interaction_percentage(self) -> float:
        if self.total_steps == 0:
            return 0.0
        return 100.0 * self.total_interactions / self.total_steps


def run_seed(base_seed: int, run_idx: int) -> int:
    digest = hashlib.sha256(f"{base_seed}:{run_idx}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_env(cfg: ExperimentConfig, rng):
    env_cfg = cfg.env
    if env_cfg.name == "mountain_car":
        return MountainCarEnv(rng, env_cfg.mc_start_low, env_cfg.mc_start_high,
                              env_cfg.mc_step_cap)
    omap = ObstacleMap.load(env_cfg.map_path) if env_cfg.map_path else default_map()
    return DrivingEnv(
        rng, omap, dt=env_cfg.dt, car_radius=env_cfg.car_radius,
        collision_mode=env_cfg.collision_mode, start_velocity=env_cfg.start_velocity,
        heading_mode=env_cfg.heading_mode, sensor_offsets=env_cfg.sensor_offsets,
        step_cap=env_cfg.sdc_step_cap)


def make_user(cfg: ExperimentConfig, env):
    if cfg.user is None:
        return None
    profile = ALL_PROFILES[cfg.user]
    if profile.kind == KIND_RULE:
        return RuleUser.from_profile(profile)
    oracle = optimal_mc_action if cfg.env.name == "mountain_car" else sdc_avoid_action
    return StateUser(profile, env.schema, oracle, env.n_actions,
                     eval_magnitude=cfg.advice.eval_magnitude)


def run_episode(env, agent: Agent, user, rng, run_idx: int, episode_idx: int) -> EpisodeMetrics:
    """One episode of the advised learning loop."""
    case = env.reset()
    state = env.state_id
    evaluative = agent.evaluative
    interactions = 0
    retained_uses = 0
    reward_total = 0.0
    steps = env.step_cap
    for step in range(env.step_cap):
        choice = agent.select_intended(state, case)
        if user is not None and not evaluative:
            if isinstance(user, RuleUser):
                advice = user.advise(case, choice.action)
                if advice is not None:
                    agent.receive_rule_advice(case, advice.rule, advice.action)
                    choice = ActionChoice(advice.action, SOURCE_FRESH)
                    interactions += 1
            else:
                advised = user.advise_action(case, state, agent.persistent,
                                             agent.advised_keys, rng)
                if advised is not None:
                    agent.receive_action_advice(state, case, advised)
                    choice = ActionChoice(advised, SOURCE_FRESH)
                    interactions += 1
        if choice.source == SOURCE_RETAINED:
            retained_uses += 1
        transition = env.step(choice.action)
        next_state = env.state_id
        reward = transition.reward
        reward_total += reward
        if evaluative and user is not None:
            value = user.advise_evaluation(case, state, choice.action,
                                           agent.persistent, agent.advised_keys, rng)
            if value is not None:
                interactions += 1
                agent.receive_evaluation(state, choice.action, value)
                reward += value
            else:
                value, replayed = agent.retained_evaluation(state, choice.action)
                if replayed:
                    retained_uses += 1
                    reward += value
        agent.update(state, choice.action, reward,
                     None if transition.terminal else next_state)
        if transition.terminal:
            steps = step + 1
            break
        state = next_state
        case = transition.state_after
    agent.end_episode()
    return EpisodeMetrics(run_idx, episode_idx, steps, reward_total,
                          interactions, retained_uses)


def run_one(cfg: ExperimentConfig, run_idx: int) -> list[EpisodeMetrics]:
    """One seeded repetition: fresh environment, agent, user, advice model."""
    rng = random.Random(run_seed(cfg.base_seed, run_idx))
    env = make_env(cfg, rng)
    agent = make_agent(cfg.agent, env.n_states, env.n_actions, cfg.learning_params(),
                       rng, cfg.ppr.make_state(), schema=env.schema, vocab=env.vocab)
    user = make_user(cfg, env)
    return [run_episode(env, agent, user, rng, run_idx, ep)
            for ep in range(cfg.episodes_per_run)]


def run_experiment(cfg: ExperimentConfig, parallel: int = 1) -> list[EpisodeMetrics]:
    """All runs of an experiment, in deterministic run order."""
    cfg.validate()
    if parallel > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_worker, [(cfg, i) for i in range(cfg.runs)]))
    else:
        chunks = [run_one(cfg, i) for i in range(cfg.runs)]
    metrics = []
    for chunk in chunks:
        metrics.extend(chunk)
    return metrics


def _worker(args) -> list[EpisodeMetrics]:
    cfg, run_idx = args
    return run_one(cfg, run_idx)


def summarize(cfg: ExperimentConfig, metrics: list[EpisodeMetrics]) -> RunSummary:
    episodes = cfg.episodes_per_run
    per_episode = [[] for _ in range(episodes)]
    rewards = [[] for _ in range(episodes)]
    for m in metrics:
        per_episode[m.episode].append(m.steps)
        rewards[m.episode].append(m.reward)
    steps_mean, steps_std, reward_mean, reward_std = [], [], [], []
    for ep in range(episodes):
        steps_mean.append(_mean(per_episode[ep]))
        steps_std.append(_std(per_episode[ep]))
        reward_mean.append(_mean(rewards[ep]))
        reward_std.append(_std(rewards[ep]))
    return RunSummary(
        agent=cfg.agent,
        user=cfg.user,
        runs=cfg.runs,
        episodes_per_run=episodes,
        episode_steps_mean=steps_mean,
        episode_steps_std=steps_std,
        episode_reward_mean=reward_mean,
        episode_reward_std=reward_std,
        total_steps=sum(m.steps for m in metrics),
        total_interactions=sum(m.interactions for m in metrics),
        total_retained_uses=sum(m.retained_uses for m in metrics),
    )


def _mean(xs) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def _std(xs) -> float:
    if len(xs) < 2:
        return 0.0
    mu = _mean(xs)
    return (sum((x - mu) ** 2 for x in xs) / (len(xs) - 1)) ** 0.5


def write_metrics(metrics: list[EpisodeMetrics], path) -> None:
    """Per-episode CSV, deterministically ordered by (run, episode)."""
    rows = sorted(metrics, key=lambda m: (m.run, m.episode))
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(METRICS_HEADER)
            for m in rows:
                writer.writerow([m.run, m.episode, m.steps, repr(m.reward),
                                 m.interactions, m.retained_uses])
    except OSError as e:
        raise OSError(f"cannot write metrics to {path}: {e}") from e


def read_metrics(path) -> list[EpisodeMetrics]:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = tuple(next(reader))
            if header != METRICS_HEADER:
                raise ValueError(f"unexpected metrics header {header} in {path}")
            return [EpisodeMetrics(int(r[0]), int(r[1]), int(r[2]), float(r[3]),
                                   int(r[4]), int(r[5])) for r in reader]
    except OSError as e:
        raise OSError(f"cannot read metrics from {path}: {e}") from e


def write_summary(summaries: list[RunSummary], path) -> None:
    """Interaction summary CSV mirroring the interaction tables."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(SUMMARY_HEADER)
            for s in summaries:
                writer.writerow([s.agent, s.user or "NONE", s.total_interactions,
                                 f"{s.interaction_percentage:.4f}"])
    except OSError as e:
        raise OSError(f"cannot write summary to {path}: {e}") from e
