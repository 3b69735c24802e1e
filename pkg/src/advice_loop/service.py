"""Live advising sessions over a full-duplex newline-delimited JSON protocol.

One session runs one agent/environment loop in stepped or timed mode. Each
step the trainer may be prompted with the current case, the agent's intended
action, and (when that action comes from retained advice) the advice's
cornerstone case plus a feature diff. Submissions take effect on the step
they were prompted for; anything else is a stale-prompt error.

Message envelope: ``{"type": ..., "session": ..., "seq": ..., "payload": ...}``.
Outbound types: ``session_info``, ``state_update``, ``prompt``, ``ack``,
``error``. Inbound types: ``control`` and ``submit``.
"""

from __future__ import annotations

import json
import random
import socketserver
import threading
import time
import uuid
from dataclasses import dataclass, field

from .agents import make_agent
from .cases import case_diff
from .config import ExperimentConfig, PPRConfig, AdviceConfig, EnvConfig
from .harness import make_env
from .rdr import EXPLORE, RuleRejected
from .rl import (
    ActionChoice,
    LearningParams,
    SOURCE_FRESH,
    SOURCE_RETAINED,
    qtable_rows,
)
from .rules import ParseError, UnknownFeature, parse_rule

PROMPT_EVERY_STEP = "every_step"
PROMPT_ON_ADVICE = "on_advice"
PROMPT_EVERY_N = "every_n"

MODE_PAUSED = "paused"
MODE_STEPPING = "stepping"
MODE_RUNNING = "running"

SUBMIT_APPROVE = "approve"
SUBMIT_ACTION = "action"
SUBMIT_RULE = "rule"
SUBMIT_EVALUATE = "evaluate"


@dataclass
class SessionConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: str = "INTERACTIVE"
    seed: int = 0
    learning: LearningParams | None = None
    ppr: PPRConfig = field(default_factory=PPRConfig)
    advice: AdviceConfig = field(default_factory=AdviceConfig)
    prompt_policy: str = PROMPT_EVERY_STEP
    prompt_every: int = 25
    running_timeout: float = 10.0
    q_snapshot_on_episode: bool = False
    log_path: str | None = None

    @classmethod
    def from_experiment(cls, cfg: ExperimentConfig) -> "SessionConfig":
        return cls(env=cfg.env, seed=cfg.base_seed, learning=cfg.learning,
                   ppr=cfg.ppr, advice=cfg.advice)

    def learning_params(self) -> LearningParams:
        if self.learning is not None:
            return self.learning
        from .config import DEFAULT_LEARNING

        return DEFAULT_LEARNING[self.env.name]


@dataclass
class Prompt:
    step: int
    case: dict
    intended: ActionChoice
    cornerstone: dict | None
    diff: list | None


class SessionError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class Session:
    """One advising loop; thread-safe; emits messages through a callback."""

    def __init__(self, cfg: SessionConfig, emit=None, session_id: str | None = None):
        self.cfg = cfg
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self._sink: list = []
        self._emit = emit if emit is not None else self._sink.append
        self._lock = threading.RLock()
        self._submission = threading.Condition(self._lock)
        self.rng = random.Random(cfg.seed)
        self.env = make_env(_as_experiment(cfg), self.rng)
        self.agent = make_agent(cfg.agent, self.env.n_states, self.env.n_actions,
                                cfg.learning_params(), self.rng, cfg.ppr.make_state(),
                                schema=self.env.schema, vocab=self.env.vocab)
        self.mode = MODE_PAUSED
        self.rate = 5.0
        self.pending: Prompt | None = None
        self.step_index = 0
        self.episode = 0
        self.episode_steps = 0
        self.episode_reward = 0.0
        self._seq = 0
        self._last_update: tuple[int, int] | None = None
        self._advice_cases: dict[int, dict] = {}
        self._case = self.env.reset()
        self._state = self.env.state_id
        self._runner: threading.Thread | None = None
        self._closed = False
        self.log: list[dict] = []
        self._log_file = open(cfg.log_path, "a", encoding="utf-8") if cfg.log_path else None
        self._log({"event": "open", "seed": cfg.seed, "agent": cfg.agent,
                   "env": cfg.env.name})
        self._send("session_info", self._session_info_payload())

    # -- plumbing ---------------------------------------------------------

    def _session_info_payload(self) -> dict:
        payload = {
            "session": self.session_id,
            "environment": self.cfg.env.name,
            "features": [list(f) for f in self.env.schema.features],
            "actions": [a.name for a in self.env.action_enum],
            "mode": self.mode,
            "step": self.step_index,
            "episode": self.episode,
        }
        # the trainer's view includes world data hidden from the agent
        if hasattr(self.env, "map"):
            payload["map"] = self.env.map.to_json_obj()
            payload["sensor_offsets"] = {k: list(v) for k, v in self.env.offsets.items()}
        return payload

    def _send(self, mtype: str, payload: dict) -> None:
        self._seq += 1
        self._emit({"type": mtype, "session": self.session_id,
                    "seq": self._seq, "payload": payload})

    def _log(self, entry: dict) -> None:
        self.log.append(entry)
        if self._log_file is not None:
            self._log_file.write(json.dumps(entry, sort_keys=True) + "\n")
            self._log_file.flush()

    def drain(self) -> list:
        """Collected outbound messages (only when no emit callback was given)."""
        out, self._sink[:] = self._sink[:], []
        return out

    # -- control ----------------------------------------------------------

    def control(self, payload: dict) -> None:
        mode = payload.get("mode")
        with self._lock:
            if self._closed:
                raise SessionError("closed", "session is closed")
            if mode == "step":
                self.mode = MODE_STEPPING
                self._advance()
            elif mode == MODE_PAUSED:
                self.mode = MODE_PAUSED
            elif mode == MODE_RUNNING:
                self.mode = MODE_RUNNING
                if payload.get("rate"):
                    self.rate = float(payload["rate"])
                self._ensure_runner()
            elif mode == MODE_STEPPING:
                self.mode = MODE_STEPPING
            else:
                raise SessionError("bad_control", f"unknown mode {mode!r}")
            self._submission.notify_all()  # wake a runner waiting on a prompt

    def _ensure_runner(self) -> None:
        if self._runner is None or not self._runner.is_alive():
            self._runner = threading.Thread(target=self._run_loop, daemon=True)
            self._runner.start()

    def _run_loop(self) -> None:
        while True:
            with self._lock:
                if self.mode != MODE_RUNNING or self._closed:
                    return
                if self.pending is None:
                    self._advance()
                if self.pending is not None:
                    # wait for a submission; no reply means the user ignores
                    self._submission.wait(self.cfg.running_timeout)
                    if self.pending is not None and self.mode == MODE_RUNNING:
                        self._resolve(self.pending.intended, record_ignore=True)
                rate = self.rate
            time.sleep(1.0 / rate if rate > 0 else 0.0)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self.mode = MODE_PAUSED
            if self._log_file is not None:
                self._log_file.close()
                self._log_file = None

    # -- the step cycle ----------------------------------------------------

    def _advance(self) -> None:
        """Start one step: either prompt the trainer or execute immediately."""
        if self.pending is not None:
            # a step command while prompted counts as ignoring the prompt
            self._resolve(self.pending.intended, record_ignore=True)
            return
        intended = self.agent.select_intended(self._state, self._case)
        if self._should_prompt(intended):
            cornerstone = self._cornerstone_for(intended)
            diff = None
            if cornerstone is not None:
                diff = [
                    {"feature": f, "current": cur, "cornerstone": old}
                    for f, cur, old in case_diff(self._case, cornerstone, self.env.schema)
                ]
            self.pending = Prompt(self.step_index, dict(self._case), intended,
                                  cornerstone, diff)
            payload = {
                "step": self.step_index,
                "case": dict(self._case),
                "intended_action": self.env.action_enum(intended.action).name,
                "source": intended.source,
            }
            if cornerstone is not None:
                payload["cornerstone"] = cornerstone
                payload["diff"] = diff
            self._log({"event": "prompt", "step": self.step_index,
                       "intended": intended.action, "source": intended.source})
            self._send("prompt", payload)
            return
        self._execute(intended)

    def _should_prompt(self, intended: ActionChoice) -> bool:
        policy = self.cfg.prompt_policy
        if policy == PROMPT_EVERY_STEP:
            return True
        if policy == PROMPT_ON_ADVICE:
            return intended.source == SOURCE_RETAINED
        if policy == PROMPT_EVERY_N:
            return self.step_index % max(1, self.cfg.prompt_every) == 0
        return False

    def _cornerstone_for(self, intended: ActionChoice):
        if intended.source != SOURCE_RETAINED:
            return None
        store = getattr(self.agent, "store", None)
        if store is not None and self._state in store:
            return self._advice_cases.get(self._state)
        tree = getattr(self.agent, "tree", None)
        if tree is not None:
            conclusion, node, _ = tree.classify(self._case)
            if conclusion is not EXPLORE and node.cornerstone is not None:
                return dict(node.cornerstone)
        return None

    def _execute(self, choice: ActionChoice) -> None:
        transition = self.env.step(choice.action)
        next_state = self.env.state_id
        self.agent.update(self._state, choice.action, transition.reward,
                          None if transition.terminal else next_state)
        self._last_update = (self._state, choice.action)
        self.episode_steps += 1
        self.episode_reward += transition.reward
        payload = {
            "step": self.step_index,
            "case": dict(transition.state_after),
            "reward": transition.reward,
            "episode": self.episode,
            "action": self.env.action_enum(choice.action).name,
            "source": choice.source,
            "terminal": bool(transition.terminal),
        }
        if hasattr(self.env, "pose"):
            pose = self.env.pose
            payload["pose"] = {"x": pose.x, "y": pose.y, "heading": pose.heading}
        self._log({"event": "step", "step": self.step_index,
                   "action": choice.action, "source": choice.source})
        self.step_index += 1
        ended = transition.terminal or self.episode_steps >= self.env.step_cap
        if ended:
            self.agent.end_episode()
            if self.cfg.q_snapshot_on_episode:
                payload["q_snapshot"] = [
                    [s, a, v] for s, a, v in qtable_rows(self.agent.q) if v != 0.0
                ]
            self.episode += 1
            self.episode_steps = 0
            self.episode_reward = 0.0
            self._case = self.env.reset()
            self._state = self.env.state_id
        else:
            self._case = transition.state_after
            self._state = next_state
        self._send("state_update", payload)

    def _resolve(self, choice: ActionChoice, record_ignore: bool = False) -> None:
        prompt = self.pending
        self.pending = None
        if record_ignore:
            self._log({"event": "ignore", "step": prompt.step})
        self._execute(choice)

    # -- submissions -------------------------------------------------------

    def submit(self, payload: dict) -> None:
        with self._lock:
            if self._closed:
                raise SessionError("closed", "session is closed")
            if self.pending is None or payload.get("step") != self.pending.step:
                raise SessionError(
                    "stale_prompt",
                    f"no pending prompt for step {payload.get('step')!r}")
            kind = payload.get("kind")
            prompt = self.pending
            if kind == SUBMIT_APPROVE:
                self._log({"event": "submit", "step": prompt.step,
                           "payload": {"kind": kind}})
                self._resolve(prompt.intended)
            elif kind == SUBMIT_ACTION:
                action = self._parse_action(payload.get("action"))
                self.agent.receive_action_advice(self._state, self._case, action)
                self._advice_cases.setdefault(self._state, dict(self._case))
                self._log({"event": "submit", "step": prompt.step,
                           "payload": {"kind": kind, "action": action}})
                self._resolve(ActionChoice(action, SOURCE_FRESH))
            elif kind == SUBMIT_RULE:
                action = self._parse_action(payload.get("action"))
                text = payload.get("rule_text", "")
                try:
                    rule = parse_rule(text, self.env.schema)
                except (ParseError, UnknownFeature) as e:
                    raise SessionError("parse_error", str(e)) from e
                if not rule.evaluate(self._case):
                    raise SessionError(
                        "rule_rejected",
                        f"rule {rule} is false on the current case")
                try:
                    self.agent.receive_rule_advice(self._case, rule, action)
                except RuleRejected as e:
                    raise SessionError("rule_rejected", str(e)) from e
                except AttributeError:
                    raise SessionError(
                        "unsupported_submission",
                        f"agent kind {self.agent.kind} does not model rules") from None
                self._log({"event": "submit", "step": prompt.step,
                           "payload": {"kind": kind, "action": action,
                                       "rule_text": str(rule)}})
                self._resolve(ActionChoice(action, SOURCE_FRESH))
            elif kind == SUBMIT_EVALUATE:
                sign = payload.get("sign")
                if sign not in (1, -1):
                    raise SessionError("bad_submission", "sign must be +1 or -1")
                if self._last_update is None:
                    raise SessionError("bad_submission", "no step to evaluate yet")
                value = sign * self.cfg.advice.eval_magnitude
                s, a = self._last_update
                # the update rule is linear in the reward, so a late
                # supplemental reward folds in as alpha * value
                self.agent.q.values[s][a] += self.agent.params.alpha * value
                self.agent.receive_evaluation(s, a, value)
                self._log({"event": "submit", "step": prompt.step,
                           "payload": {"kind": kind, "sign": sign}})
                self._resolve(prompt.intended)
            else:
                raise SessionError("bad_submission", f"unknown kind {kind!r}")
            self._submission.notify_all()

    def _parse_action(self, name) -> int:
        try:
            return int(self.env.action_enum[name])
        except (KeyError, TypeError):
            raise SessionError("bad_submission", f"unknown action {name!r}") from None

    def advice_model_state(self) -> dict:
        """Canonical serializable view of everything the agent has retained."""
        out = {}
        tree = getattr(self.agent, "tree", None)
        if tree is not None:
            out["rdr_tree"] = tree.to_json_obj()
        store = getattr(self.agent, "store", None)
        if store is not None and hasattr(store, "items"):
            out["state_store"] = sorted(store.items())
        eval_store = getattr(self.agent, "eval_store", None)
        if eval_store is not None:
            out["eval_store"] = sorted((list(k), v) for k, v in eval_store.items())
        return out

    def advice_model_bytes(self) -> bytes:
        return json.dumps(self.advice_model_state(), sort_keys=True,
                          separators=(",", ":")).encode()


def _as_experiment(cfg: SessionConfig) -> ExperimentConfig:
    return ExperimentConfig(env=cfg.env, agent="UQL", user=None,
                            learning=cfg.learning, ppr=cfg.ppr, advice=cfg.advice)


def open_session(cfg: SessionConfig, emit=None) -> Session:
    return Session(cfg, emit=emit)


def replay_session(cfg: SessionConfig, log: list[dict]) -> Session:
    """Rebuild a session headlessly from its event log.

    The log's prompts are deterministic given the config, so replay only
    needs to re-apply each submission (or ignore) at its recorded step.
    """
    session = Session(cfg)
    submissions = {}
    total_steps = 0
    for entry in log:
        if entry["event"] == "submit":
            submissions[entry["step"]] = entry["payload"]
        elif entry["event"] == "step":
            total_steps = max(total_steps, entry["step"] + 1)
    while session.step_index < total_steps:
        session.control({"mode": "step"})
        if session.pending is not None:
            step = session.pending.step
            if step in submissions:
                payload = dict(submissions[step])
                payload["step"] = step
                if payload["kind"] in (SUBMIT_ACTION, SUBMIT_RULE):
                    payload["action"] = session.env.action_enum(payload["action"]).name
                session.submit(payload)
            # otherwise the next step command ignores the prompt, as recorded
    return session


def load_log(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


# -- TCP transport ---------------------------------------------------------


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        write_lock = threading.Lock()

        def emit(message: dict) -> None:
            data = (json.dumps(message, sort_keys=True) + "\n").encode()
            with write_lock:
                try:
                    self.wfile.write(data)
                    self.wfile.flush()
                except OSError:
                    pass

        session = Session(self.server.session_config, emit=emit)
        try:
            for raw in self.rfile:
                line = raw.strip()
                if not line:
                    continue
                try:
                    message = json.loads(line)
                except json.JSONDecodeError as e:
                    emit({"type": "error", "session": session.session_id, "seq": 0,
                          "payload": {"code": "bad_json", "message": str(e)}})
                    continue
                seq = message.get("seq", 0)
                try:
                    mtype = message.get("type")
                    if mtype == "control":
                        session.control(message.get("payload", {}))
                    elif mtype == "submit":
                        session.submit(message.get("payload", {}))
                    else:
                        raise SessionError("bad_type", f"unknown type {mtype!r}")
                    session._send("ack", {"seq": seq})
                except SessionError as e:
                    session._send("error", {"code": e.code, "message": str(e)})
        finally:
            session.close()


class AdviceServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, cfg: SessionConfig, host: str, port: int):
        super().__init__((host, port), _Handler)
        self.session_config = cfg


def serve_tcp(cfg: SessionConfig, host: str, port: int) -> None:
    with AdviceServer(cfg, host, port) as server:
        server.serve_forever()

