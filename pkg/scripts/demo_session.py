#!/usr/bin/env python3
"""Scripted walk through the live advising protocol over TCP.

Starts an in-process server, connects as a trainer, steps the session,
answers the first prompts with an action recommendation and a rule, and
prints every frame exchanged.
"""

import json
import socket
import sys
import threading

from advice_loop.config import EnvConfig
from advice_loop.service import AdviceServer, SessionConfig


def main() -> int:
    cfg = SessionConfig(env=EnvConfig(name="mountain_car"), seed=7)
    server = AdviceServer(cfg, "127.0.0.1", 0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    print(f"server on 127.0.0.1:{port}")

    script = {
        0: {"kind": "action", "action": "LEFT"},
        1: {"kind": "rule", "rule_text": "velocity <= 0", "action": "LEFT"},
    }
    seq = 0

    with socket.create_connection(("127.0.0.1", port)) as sock:
        f = sock.makefile("rw", encoding="utf-8")

        def send(mtype, payload):
            nonlocal seq
            seq += 1
            frame = json.dumps({"type": mtype, "seq": seq, "payload": payload})
            print(f">> {frame}")
            f.write(frame + "\n")
            f.flush()

        steps_done = 0
        while steps_done < 6:
            line = f.readline()
            if not line:
                break
            message = json.loads(line)
            print(f"<< {line.strip()}")
            if message["type"] == "session_info":
                send("control", {"mode": "step"})
            elif message["type"] == "prompt":
                step = message["payload"]["step"]
                answer = script.get(step, {"kind": "approve"})
                send("submit", dict(answer, step=step))
            elif message["type"] == "state_update":
                steps_done += 1
                if steps_done < 6:
                    send("control", {"mode": "step"})
    server.shutdown()
    server.server_close()
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
