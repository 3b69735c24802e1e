#!/usr/bin/env python3
"""Generate golden protocol fixtures for the browser-console tests.

Runs one deterministic live session, applies a scripted trainer (one action
recommendation, one rule, one approval), verifies the resulting advice-model
state is byte-identical to injecting the same advice headlessly, and writes
the message transcript plus expected client frames for the frontend tests.
"""

import json
import sys
from pathlib import Path

from advice_loop.config import EnvConfig
from advice_loop.envs.mountain_car import MCAction
from advice_loop.rdr import RDRTree
from advice_loop.rules import parse_rule
from advice_loop.service import PROMPT_EVERY_STEP, Session, SessionConfig
from advice_loop.stores import StateAdviceStore

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"

SCRIPT = {
    0: {"kind": "action", "action": "NOTHING"},
    1: {"kind": "rule", "rule_text": "velocity <= 0", "action": "LEFT"},
    2: {"kind": "approve"},
}
TOTAL_PROMPTS = 4  # the fourth prompt is left unanswered (stale on next step)


def main() -> int:
    cfg = SessionConfig(env=EnvConfig(name="mountain_car"), seed=2025,
                        prompt_policy=PROMPT_EVERY_STEP)
    outbound = []
    session = Session(cfg, emit=outbound.append, session_id="fixture")

    expected_frames = []
    seq = 0
    submissions = {}
    prompt_cases = {}
    prompts_seen = 0
    while prompts_seen < TOTAL_PROMPTS:
        session.control({"mode": "step"})
        if session.pending is None:
            continue
        step = session.pending.step
        prompt_cases[step] = dict(session.pending.case)
        prompts_seen += 1
        if step in SCRIPT:
            payload = dict(SCRIPT[step], step=step)
            seq += 1
            ordered = {k: payload[k] for k in sorted(payload)}
            # byte-compatible with the client's JSON.stringify framing
            expected_frames.append(json.dumps(
                {"payload": ordered, "seq": seq, "type": "submit"},
                separators=(",", ":")))
            session.submit(payload)
    # flush the unanswered prompt so the transcript shows it going stale
    session.control({"mode": "step"})

    # headless injection of the same advice must match the session byte-wise
    from advice_loop.envs.mountain_car import MCState, mc_discretize

    headless_store = StateAdviceStore()
    case0 = prompt_cases[0]
    action_state = mc_discretize(MCState(case0["position"], case0["velocity"]))
    headless_store.store(action_state, int(MCAction.NOTHING))
    headless_tree = RDRTree(session.env.schema, session.env.vocab)
    case1 = prompt_cases[1]
    _, _, insertion = headless_tree.classify(case1)
    headless_tree.insert(insertion, parse_rule("velocity <= 0", session.env.schema),
                         int(MCAction.LEFT), case1)
    headless = {
        "rdr_tree": headless_tree.to_json_obj(),
        "state_store": sorted(headless_store.items()),
        "eval_store": [],
    }
    headless_bytes = json.dumps(headless, sort_keys=True, separators=(",", ":")).encode()
    live_bytes = session.advice_model_bytes()
    if live_bytes != headless_bytes:
        print("FATAL: session advice model diverges from headless injection")
        print("live:    ", live_bytes.decode())
        print("headless:", headless_bytes.decode())
        return 1

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    fixture = {
        "script": {str(k): v for k, v in SCRIPT.items()},
        "server_messages": outbound,
        "expected_submit_frames": expected_frames,
        "advice_model": json.loads(live_bytes.decode()),
        "rule_cases": [
            {"text": "velocity <= 0", "canonical": "velocity <= 0"},
            {"text": "position < -0.53 AND position > -0.865",
             "canonical": "position < -0.53 AND position > -0.865"},
            {"text": "right OR right-front-close", "canonical": "right OR right-front-close"},
            {"text": "1==1", "canonical": "1==1"},
            {"text": "left == True", "canonical": "left"},
            {"text": "left != true", "canonical": "left == false"},
            {"text": "velocity = 2.5", "canonical": "velocity == 2.5"},
        ],
    }
    out = FIXTURE_DIR / "session.json"
    out.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print(f"fixture written to {out} ({len(outbound)} server messages, "
          f"{len(expected_frames)} expected frames); "
          "advice-model byte-identity verified")
    return 0


if __name__ == "__main__":
    sys.exit(main())
