import json
import socket
import threading
import time

import pytest

from advice_loop.config import EnvConfig, PPRConfig
from advice_loop.envs.mountain_car import MCAction
from advice_loop.rdr import RDRTree
from advice_loop.rl import SOURCE_RETAINED
from advice_loop.rules import parse_rule
from advice_loop.service import (
    AdviceServer,
    PROMPT_EVERY_N,
    PROMPT_EVERY_STEP,
    PROMPT_ON_ADVICE,
    Session,
    SessionConfig,
    SessionError,
    replay_session,
)


def make_cfg(**kw):
    kw.setdefault("env", EnvConfig(name="mountain_car"))
    kw.setdefault("seed", 42)
    kw.setdefault("prompt_policy", PROMPT_ON_ADVICE)
    return SessionConfig(**kw)


def updates(messages):
    return [m for m in messages if m["type"] == "state_update"]


def prompts(messages):
    return [m for m in messages if m["type"] == "prompt"]


# -- stepping contract --------------------------------------------------------


def test_three_steps_emit_three_state_updates():
    session = Session(make_cfg())
    for _ in range(3):
        session.control({"mode": "step"})
    messages = session.drain()
    assert len(updates(messages)) == 3
    assert messages[0]["type"] == "session_info"
    assert [m["payload"]["step"] for m in updates(messages)] == [0, 1, 2]


def test_two_sessions_are_independent():
    a = Session(make_cfg(seed=1))
    b = Session(make_cfg(seed=2))
    for _ in range(5):
        a.control({"mode": "step"})
    assert a.session_id != b.session_id
    assert b.step_index == 0
    assert a.step_index == 5


def test_envelope_shape_and_seq_monotone():
    session = Session(make_cfg())
    session.control({"mode": "step"})
    messages = session.drain()
    seqs = [m["seq"] for m in messages]
    assert seqs == sorted(seqs)
    for m in messages:
        assert set(m) == {"type", "session", "seq", "payload"}
        assert m["session"] == session.session_id


# -- prompts --------------------------------------------------------------


def test_first_prompt_has_no_cornerstone_or_diff():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    [prompt] = prompts(session.drain())
    payload = prompt["payload"]
    assert payload["step"] == 0
    assert "cornerstone" not in payload
    assert "diff" not in payload
    assert payload["intended_action"] in {a.name for a in MCAction}
    assert set(payload["case"]) == {"position", "velocity"}


def test_retained_recommendation_prompts_with_cornerstone_diff():
    session = Session(make_cfg(
        prompt_policy=PROMPT_EVERY_STEP,
        ppr=PPRConfig(start=1.0, decay=0.0),
    ))
    session.control({"mode": "step"})
    [prompt] = prompts(session.drain())
    session.submit({"step": 0, "kind": "action", "action": "RIGHT"})
    session.drain()
    seen = None
    for _ in range(10):
        session.control({"mode": "step"})
        for p in prompts(session.drain()):
            if p["payload"]["source"] == SOURCE_RETAINED:
                seen = p["payload"]
                break
        if seen:
            break
    assert seen is not None, "retained advice never drove the intended action"
    assert seen["intended_action"] == "RIGHT"
    assert "cornerstone" in seen
    assert seen["diff"], "continuous state moved, diff must list the changes"
    for entry in seen["diff"]:
        assert set(entry) == {"feature", "current", "cornerstone"}


def test_every_n_prompt_policy():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_N, prompt_every=3))
    prompted_steps = []
    while session.step_index < 7:
        session.control({"mode": "step"})
        for p in prompts(session.drain()):
            prompted_steps.append(p["payload"]["step"])
    assert prompted_steps == [0, 3, 6]


def test_q_snapshot_emitted_on_episode_end():
    cfg = make_cfg(env=EnvConfig(name="mountain_car", mc_step_cap=3),
                   q_snapshot_on_episode=True)
    session = Session(cfg)
    for _ in range(3):
        session.control({"mode": "step"})
    last = updates(session.drain())[-1]["payload"]
    assert "q_snapshot" in last
    assert all(len(row) == 3 for row in last["q_snapshot"])
    assert session.episode == 1


# -- submissions ------------------------------------------------------------


def test_rule_submission_matches_headless_injection_byte_for_byte():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    [prompt] = prompts(session.drain())
    case = prompt["payload"]["case"]
    assert case["velocity"] == 0.0  # fresh reset, at rest
    session.submit({"step": 0, "kind": "rule",
                    "rule_text": "velocity <= 0", "action": "LEFT"})
    assert updates(session.drain())

    headless = RDRTree(session.env.schema, session.env.vocab)
    _, _, insertion = headless.classify(case)
    headless.insert(insertion, parse_rule("velocity <= 0", session.env.schema),
                    MCAction.LEFT, case)
    assert session.agent.tree.to_json() == headless.to_json()
    assert session.agent.tree.classify({"position": -0.5, "velocity": -0.02})[0] == MCAction.LEFT


def test_all_submission_kinds_match_headless_injection_byte_for_byte():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    script = {
        0: {"kind": "action", "action": "NOTHING"},
        1: {"kind": "rule", "rule_text": "velocity <= 0", "action": "LEFT"},
        2: {"kind": "evaluate", "sign": -1},
    }
    injected = []
    while session.step_index < 5:
        session.control({"mode": "step"})
        if session.pending is None:
            continue
        step = session.pending.step
        if step in script:
            injected.append((step, session._state, dict(session.pending.case),
                             session._last_update))
            session.submit(dict(script[step], step=step))
        else:
            session.control({"mode": "step"})

    # inject the same advice directly through the advice-model operations
    from advice_loop.stores import EvalAdviceStore, StateAdviceStore

    store = StateAdviceStore()
    eval_store = EvalAdviceStore()
    tree = RDRTree(session.env.schema, session.env.vocab)
    for step, state, case, last_update in injected:
        entry = script[step]
        if entry["kind"] == "action":
            store.store(state, int(MCAction[entry["action"]]))
        elif entry["kind"] == "rule":
            _, _, insertion = tree.classify(case)
            tree.insert(insertion, parse_rule(entry["rule_text"], session.env.schema),
                        int(MCAction[entry["action"]]), case)
        else:
            eval_store.store(last_update[0], last_update[1], float(entry["sign"]))
    headless = {
        "rdr_tree": tree.to_json_obj(),
        "state_store": sorted(store.items()),
        "eval_store": sorted((list(k), v) for k, v in eval_store.items()),
    }
    import json as _json

    headless_bytes = _json.dumps(headless, sort_keys=True,
                                 separators=(",", ":")).encode()
    assert session.advice_model_bytes() == headless_bytes


def test_action_submission_is_stored_and_executed():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    [prompt] = prompts(session.drain())
    state = session._state
    session.submit({"step": 0, "kind": "action", "action": "NOTHING"})
    [update] = updates(session.drain())
    assert update["payload"]["action"] == "NOTHING"
    assert update["payload"]["source"] == "fresh_advice"
    assert session.agent.store.recall(state) == MCAction.NOTHING


def test_stale_submission_rejected_without_state_change():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    session.drain()
    with pytest.raises(SessionError) as exc:
        session.submit({"step": 99, "kind": "approve"})
    assert exc.value.code == "stale_prompt"
    assert session.step_index == 0
    assert session.pending is not None


def test_parse_and_rejection_errors_relayed():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    session.drain()
    with pytest.raises(SessionError) as exc:
        session.submit({"step": 0, "kind": "rule", "rule_text": "velocity >>", "action": "LEFT"})
    assert exc.value.code == "parse_error"
    with pytest.raises(SessionError) as exc:
        session.submit({"step": 0, "kind": "rule", "rule_text": "velocity > 0", "action": "RIGHT"})
    assert exc.value.code == "rule_rejected"  # reset velocity is 0, rule is false
    with pytest.raises(SessionError) as exc:
        session.submit({"step": 0, "kind": "action", "action": "WARP"})
    assert exc.value.code == "bad_submission"
    session.submit({"step": 0, "kind": "approve"})
    assert session.step_index == 1


def test_approve_equals_ignore():
    approving = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP, seed=7))
    ignoring = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP, seed=7))
    for _ in range(40):
        approving.control({"mode": "step"})
        if approving.pending is not None:
            approving.submit({"step": approving.pending.step, "kind": "approve"})
        ignoring.control({"mode": "step"})
        if ignoring.pending is not None:
            ignoring.control({"mode": "step"})  # stepping past a prompt ignores it
    assert approving.agent.q.values == ignoring.agent.q.values
    assert approving.env.state == ignoring.env.state


def test_evaluate_folds_into_last_update_and_store():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP))
    session.control({"mode": "step"})
    session.drain()
    session.submit({"step": 0, "kind": "approve"})
    s, a = session._last_update
    before = session.agent.q.values[s][a]
    session.control({"mode": "step"})
    session.submit({"step": 1, "kind": "evaluate", "sign": -1})
    alpha = session.agent.params.alpha
    delta = session.agent.q.values[s][a] - before
    assert delta == pytest.approx(-alpha * session.cfg.advice.eval_magnitude)
    assert session.agent.eval_store.recall(s, a) == -1.0


# -- replay -----------------------------------------------------------------


def test_replay_reproduces_final_q_table():
    cfg = make_cfg(prompt_policy=PROMPT_EVERY_STEP, seed=11)
    live = Session(cfg)
    script = {
        0: {"kind": "rule", "rule_text": "velocity <= 0", "action": "LEFT"},
        1: {"kind": "action", "action": "RIGHT"},
        2: {"kind": "evaluate", "sign": 1},
        3: {"kind": "approve"},
    }
    while live.step_index < 30:
        live.control({"mode": "step"})
        if live.pending is not None:
            step = live.pending.step
            if step in script:
                live.submit(dict(script[step], step=step))
            # otherwise the next step command ignores the prompt
    replayed = replay_session(cfg, live.log)
    assert replayed.agent.q.values == live.agent.q.values
    assert replayed.advice_model_bytes() == live.advice_model_bytes()
    assert replayed.step_index == live.step_index


def test_event_log_records_prompts_and_submissions(tmp_path):
    log_path = tmp_path / "session.jsonl"
    cfg = make_cfg(prompt_policy=PROMPT_EVERY_STEP, log_path=str(log_path))
    session = Session(cfg)
    session.control({"mode": "step"})
    session.submit({"step": 0, "kind": "approve"})
    session.close()
    entries = [json.loads(line) for line in log_path.read_text().splitlines()]
    kinds = [e["event"] for e in entries]
    assert kinds[0] == "open"
    assert "prompt" in kinds and "submit" in kinds and "step" in kinds


# -- running mode -------------------------------------------------------------


def test_running_mode_advances_and_pause_stops():
    session = Session(make_cfg(prompt_policy=PROMPT_ON_ADVICE))
    session.control({"mode": "running", "rate": 200})
    deadline = time.time() + 5.0
    while time.time() < deadline and session.step_index < 3:
        time.sleep(0.01)
    assert session.step_index >= 3
    assert updates(session.drain())
    session.control({"mode": "paused"})
    time.sleep(0.05)
    session.drain()
    frozen = session.step_index
    time.sleep(0.2)
    assert session.step_index == frozen
    session.close()


def test_running_mode_prompt_timeout_means_ignore():
    session = Session(make_cfg(prompt_policy=PROMPT_EVERY_STEP, running_timeout=0.02))
    session.control({"mode": "running", "rate": 200})
    deadline = time.time() + 5.0
    while time.time() < deadline and session.step_index < 2:
        time.sleep(0.01)
    session.control({"mode": "paused"})
    assert session.step_index >= 2  # prompts expired and steps proceeded
    session.close()


# -- TCP transport -------------------------------------------------------------


def read_messages(sock_file, want, timeout=5.0):
    out = []
    deadline = time.time() + timeout
    while len(out) < want and time.time() < deadline:
        line = sock_file.readline()
        if not line:
            break
        out.append(json.loads(line))
    return out


def test_tcp_round_trip():
    server = AdviceServer(make_cfg(), "127.0.0.1", 0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        with socket.create_connection(("127.0.0.1", port), timeout=5) as sock:
            f = sock.makefile("rw", encoding="utf-8")
            [info] = read_messages(f, 1)
            assert info["type"] == "session_info"
            assert info["payload"]["environment"] == "mountain_car"
            assert info["payload"]["actions"] == ["LEFT", "NOTHING", "RIGHT"]
            f.write(json.dumps({"type": "control", "seq": 1,
                                "payload": {"mode": "step"}}) + "\n")
            f.flush()
            got = read_messages(f, 2)
            types = {m["type"] for m in got}
            assert "state_update" in types and "ack" in types
            f.write(json.dumps({"type": "submit", "seq": 2,
                                "payload": {"step": 99, "kind": "approve"}}) + "\n")
            f.flush()
            [err] = read_messages(f, 1)
            assert err["type"] == "error"
            assert err["payload"]["code"] == "stale_prompt"
    finally:
        server.shutdown()
        server.server_close()
