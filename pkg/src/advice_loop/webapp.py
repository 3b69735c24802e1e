"""Browser-compatible transport: the session protocol over WebSocket plus
static serving of the trainer console.

Requires the ``web`` extra (fastapi + uvicorn). Each WebSocket connection
owns one session; frames carry exactly the same JSON messages as the TCP
transport carries per line.
"""

import json
import os
from pathlib import Path

from .service import Session, SessionConfig, SessionError

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>advice-loop</title></head>
<body><h1>advice-loop service</h1>
<p>The trainer console is not built. Run <code>npm install && npm run build</code>
in <code>frontend/</code>, or connect a client to <code>/ws</code>.</p>
</body></html>"""


def find_static_dir(explicit: str | None = None) -> Path | None:
    candidates = []
    if explicit:
        candidates.append(Path(explicit))
    env = os.environ.get("ADVICE_LOOP_STATIC")
    if env:
        candidates.append(Path(env))
    here = Path(__file__).resolve()
    candidates.append(Path.cwd() / "frontend" / "dist")
    candidates.append(here.parent.parent.parent.parent / "frontend" / "dist")
    for c in candidates:
        if c.is_dir() and (c / "index.html").exists():
            return c
    return None


def create_app(cfg: SessionConfig, static_dir: str | None = None):
    try:
        from fastapi import FastAPI, WebSocket, WebSocketDisconnect
        from fastapi.responses import HTMLResponse
        from fastapi.staticfiles import StaticFiles
    except ImportError as e:
        raise RuntimeError(
            "the web console needs the 'web' extra: pip install advice-loop[web]"
        ) from e

    app = FastAPI(title="advice-loop")
    static = find_static_dir(static_dir)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        import asyncio
        import threading

        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()

        def emit(message: dict) -> None:
            loop.call_soon_threadsafe(queue.put_nowait, message)

        session = Session(cfg, emit=emit)

        async def pump_outbound():
            while True:
                message = await queue.get()
                await ws.send_text(json.dumps(message, sort_keys=True))

        pump = asyncio.create_task(pump_outbound())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError as e:
                    emit({"type": "error", "session": session.session_id, "seq": 0,
                          "payload": {"code": "bad_json", "message": str(e)}})
                    continue
                seq = message.get("seq", 0)

                def dispatch(msg=message, seq=seq):
                    try:
                        if msg.get("type") == "control":
                            session.control(msg.get("payload", {}))
                        elif msg.get("type") == "submit":
                            session.submit(msg.get("payload", {}))
                        else:
                            raise SessionError("bad_type",
                                               f"unknown type {msg.get('type')!r}")
                        session._send("ack", {"seq": seq})
                    except SessionError as e:
                        session._send("error", {"code": e.code, "message": str(e)})

                # session methods may block (running-mode prompt waits), so
                # keep them off the event loop
                threading.Thread(target=dispatch, daemon=True).start()
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            session.close()

    if static is not None:
        # catch-all mount; registered after /ws so the socket route wins
        app.mount("/", StaticFiles(directory=str(static), html=True), name="static")
    else:

        @app.get("/")
        async def index_fallback():
            return HTMLResponse(_FALLBACK_PAGE)

    return app


def serve_web(cfg: SessionConfig, host: str, port: int, static_dir: str | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(cfg, static_dir), host=host, port=port, log_level="warning")
