"""HTTP + WebSocket front end for live sessions.

Endpoints:

    POST /sessions                  create (body: session config document)
    GET  /sessions/{id}/state       full snapshot
    POST /sessions/{id}/control     one control message -> acknowledgment
    POST /sessions/{id}/advance     {"ticks": N} manual stepping (tick_rate 0)
    POST /sessions/{id}/finish      finish (idempotent) -> score
    GET  /sessions/{id}/log         the append-only event log (JSON lines)
    WS   /sessions/{id}/stream      persistent bidirectional channel

The stream carries single-line JSON documents, each with a "type" field:
"tick" and "probe" and "score" from the server, control echoes after a
control is accepted, and clients may send control messages upward on the
same socket. Connecting with ?from_tick=N first replays ticks N.. from the
event log (regenerated server-side, bit-identical by determinism), then
continues live, so a reconnecting console never simulates anything itself.

Sessions are created paused. With tick_rate > 0 a background pacer advances
one tick every tick_min/tick_rate wall seconds while the session is running.
With tick_rate = 0 the session only moves via POST .../advance.

Every session appends its events (config, controls, advances) to one file
under the session directory; a service restarted on the same directory can
replay any session from disk.
"""

from __future__ import annotations

import asyncio
import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, WebSocket
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from starlette.websockets import WebSocketDisconnect

from learnsim.scenario import ConfigError
from learnsim.session import (
    ControlRejected,
    InvalidControl,
    SessionCore,
    parse_session_config,
    replay_events,
)


def _encode(doc: dict) -> str:
    return json.dumps(doc, separators=(",", ":"))


@dataclass
class SessionRuntime:
    core: SessionCore
    log_path: Path
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: set[asyncio.Queue] = field(default_factory=set)
    pacer: asyncio.Task | None = None
    events_written: int = 0

    def flush_events(self) -> None:
        events = self.core.events
        if self.events_written < len(events):
            with open(self.log_path, "a") as fh:
                for event in events[self.events_written:]:
                    fh.write(_encode(event) + "\n")
            self.events_written = len(events)

    def broadcast(self, docs) -> None:
        lines = [_encode(doc) for doc in docs]
        for queue in list(self.subscribers):
            for line in lines:
                queue.put_nowait(line)


def create_app(session_dir: str | Path = "./sessions",
               default_tick_rate: float = 1.0,
               console_dir: str | Path | None = None) -> FastAPI:
    session_dir = Path(session_dir)
    session_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="learnsim session service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, SessionRuntime] = {}
    app.state.sessions = sessions

    def runtime(session_id: str) -> SessionRuntime:
        rt = sessions.get(session_id)
        if rt is None:
            raise HTTPException(404, f"no session {session_id!r}")
        return rt

    def ensure_pacer(rt: SessionRuntime) -> None:
        """Wall-clock pacing for tick_rate > 0 sessions while running."""
        rate = rt.core.defn.tick_rate
        if rate <= 0 or rt.core.status != "running":
            return
        if rt.pacer is not None and not rt.pacer.done():
            return

        async def pace() -> None:
            interval = rt.core.defn.tick_min / rate
            while rt.core.status == "running":
                await asyncio.sleep(interval)
                async with rt.lock:
                    if rt.core.status != "running":
                        break
                    ticks = rt.core.advance(1)
                    rt.flush_events()
                    rt.broadcast(ticks)

        rt.pacer = asyncio.create_task(pace())

    def handle_control(rt: SessionRuntime, msg) -> dict:
        """Apply one control under the caller-held lock; returns the ack."""
        try:
            ack = rt.core.apply_control(msg)
        except InvalidControl as exc:
            raise HTTPException(400, str(exc)) from exc
        except ControlRejected as exc:
            raise HTTPException(409, str(exc)) from exc
        rt.flush_events()
        ctype = msg["type"]
        if ctype == "give_test":
            rt.broadcast([ack["probe"]])
        else:
            echo = dict(msg)
            echo["effective_tick"] = ack["effective_tick"]
            rt.broadcast([echo])
        if ctype == "finish":
            rt.broadcast([rt.core.score()])
        elif ctype == "resume":
            ensure_pacer(rt)
        return ack

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"body is not valid JSON: {exc}") \
                from exc
        try:
            definition = parse_session_config(doc, default_tick_rate)
        except ConfigError as exc:
            return JSONResponse(status_code=422,
                                content={"detail": exc.errors})
        session_id = uuid.uuid4().hex[:12]
        rt = SessionRuntime(core=SessionCore(definition),
                            log_path=session_dir / f"{session_id}.jsonl")
        rt.flush_events()
        sessions[session_id] = rt
        return {"id": session_id}

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        rt = runtime(session_id)
        async with rt.lock:
            return rt.core.state_snapshot()

    @app.post("/sessions/{session_id}/control")
    async def post_control(session_id: str, request: Request):
        rt = runtime(session_id)
        try:
            msg = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"body is not valid JSON: {exc}") \
                from exc
        async with rt.lock:
            return handle_control(rt, msg)

    @app.post("/sessions/{session_id}/advance")
    async def post_advance(session_id: str, request: Request):
        rt = runtime(session_id)
        if rt.core.defn.tick_rate > 0:
            raise HTTPException(
                409, "session is wall-clock paced; advance is only for "
                     "tick_rate=0 sessions")
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"body is not valid JSON: {exc}") \
                from exc
        ticks_requested = body.get("ticks") if isinstance(body, dict) else None
        if not isinstance(ticks_requested, int) or \
                isinstance(ticks_requested, bool) or ticks_requested < 1:
            raise HTTPException(400, "body must be {\"ticks\": N} with N >= 1")
        async with rt.lock:
            try:
                ticks = rt.core.advance(ticks_requested)
            except InvalidControl as exc:
                raise HTTPException(400, str(exc)) from exc
            except ControlRejected as exc:
                raise HTTPException(409, str(exc)) from exc
            rt.flush_events()
            rt.broadcast(ticks)
            if rt.core.finished:
                rt.broadcast([rt.core.score()])
            return {"ticks": ticks}

    @app.post("/sessions/{session_id}/finish")
    async def post_finish(session_id: str):
        rt = runtime(session_id)
        async with rt.lock:
            handle_control(rt, {"type": "finish"})
            return rt.core.score()

    @app.get("/sessions/{session_id}/log")
    async def get_log(session_id: str):
        rt = runtime(session_id)
        async with rt.lock:
            rt.flush_events()
            text = rt.log_path.read_text()
        return PlainTextResponse(text)

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str,
                     from_tick: int | None = None):
        rt = sessions.get(session_id)
        if rt is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        catch_up: list[str] = []
        async with rt.lock:
            if from_tick is not None:
                _, ticks = replay_events(rt.core.events,
                                         rt.core.defn.tick_rate)
                catch_up = [_encode(t) for t in ticks
                            if t["tick"] >= from_tick]
            rt.subscribers.add(queue)

        async def sender() -> None:
            for line in catch_up:
                await websocket.send_text(line)
            while True:
                await websocket.send_text(await queue.get())

        async def receiver() -> None:
            while True:
                text = await websocket.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await websocket.send_text(_encode(
                        {"type": "error", "message": "not valid JSON"}))
                    continue
                try:
                    async with rt.lock:
                        handle_control(rt, msg)
                except HTTPException as exc:
                    await websocket.send_text(_encode(
                        {"type": "error", "message": str(exc.detail)}))

        send_task = asyncio.create_task(sender())
        recv_task = asyncio.create_task(receiver())
        try:
            done, pending = await asyncio.wait(
                {send_task, recv_task}, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and \
                        not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            rt.subscribers.discard(queue)
            for task in (send_task, recv_task):
                task.cancel()

    if console_dir is not None and Path(console_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=str(console_dir),
                                          html=True), name="console")

    return app
