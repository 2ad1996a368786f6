"""HTTP and WebSocket surface over the session engine.

Sessions are created with a plain POST; everything after that happens over
one WebSocket per participant. The first message on a socket must be a
``join``, which pins the participant and session to that connection. From
then on the server ticks the session clock before every command, sends
sender-only replies back on the same socket, and fans broadcasts out to
every connection in the room.

A background ticker keeps time moving for rooms that have gone quiet, so
proposal deadlines commit even when nobody is talking.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time
from pathlib import Path
from typing import Any, Callable

from fastapi import Body, FastAPI, WebSocket, WebSocketDisconnect
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import MeetingFlowError, ProtocolError, ProviderFailure, ValidationFailure
from .events import WireMessage
from .model import Invitation
from .session import SessionEngine, merge_session_config

TICK_INTERVAL_SECONDS = 0.25

Clock = Callable[[], float]


class ConnectionHub:
    """Tracks which sockets belong to which session room."""

    def __init__(self):
        self._rooms: dict[str, dict[WebSocket, str]] = {}

    def register(self, session_id: str, ws: WebSocket, participant_id: str) -> None:
        self._rooms.setdefault(session_id, {})[ws] = participant_id

    def unregister(self, session_id: str, ws: WebSocket) -> None:
        room = self._rooms.get(session_id)
        if room is not None:
            room.pop(ws, None)
            if not room:
                del self._rooms[session_id]

    def room(self, session_id: str) -> list[WebSocket]:
        return list(self._rooms.get(session_id, ()))

    async def broadcast(self, session_id: str, messages: list[WireMessage]) -> None:
        if not messages:
            return
        for ws in self.room(session_id):
            try:
                for message in messages:
                    await ws.send_text(message.to_json())
            except Exception:
                self.unregister(session_id, ws)


def error_message(session_id: str, exc: Exception) -> WireMessage:
    return WireMessage(
        type="error",
        session_id=session_id,
        payload={"kind": type(exc).__name__, "message": str(exc)},
    )


def build_app(
    engine: SessionEngine,
    clock: Clock | None = None,
    static_dir: str | Path | None = None,
    tick_interval: float = TICK_INTERVAL_SECONDS,
) -> FastAPI:
    """Assemble the web app around one engine instance.

    ``clock`` is injectable so tests can drive deadlines deterministically;
    the default is wall-clock time.
    """
    now: Clock = clock or time.time
    hub = ConnectionHub()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(_ticker())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    async def _ticker():
        while True:
            await asyncio.sleep(tick_interval)
            for session_id in engine.session_ids():
                try:
                    out = await run_in_threadpool(engine.tick, session_id, now())
                except MeetingFlowError:
                    continue  # a wedged advance retries on the next tick
                await hub.broadcast(session_id, out)

    app = FastAPI(lifespan=lifespan)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "sessions": len(engine.session_ids())}

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict = Body(...)):
        try:
            if "invitation" not in body:
                raise ValidationFailure('request body needs an "invitation"')
            invitation = Invitation.from_dict(body["invitation"])
            config = None
            if body.get("config"):
                config = merge_session_config(engine.default_config, body["config"])
            state = await run_in_threadpool(
                engine.create_session,
                invitation,
                now(),
                body.get("session_id"),
                config,
            )
        except ValidationFailure as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except ProviderFailure as exc:
            return JSONResponse(status_code=502, content={"error": str(exc)})
        except (KeyError, TypeError) as exc:
            return JSONResponse(status_code=400, content={"error": f"malformed body: {exc}"})
        return {"session_id": state.session_id, "lifecycle": state.lifecycle}

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket):
        await ws.accept()
        session_id: str | None = None
        participant_id: str | None = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    message = WireMessage.from_dict(json.loads(raw))
                except (ValueError, ProtocolError) as exc:
                    await ws.send_text(error_message(session_id or "", exc).to_json())
                    continue

                if participant_id is None:
                    if message.type != "join":
                        await ws.send_text(
                            error_message(
                                message.session_id,
                                ProtocolError("the first message must be a join"),
                            ).to_json()
                        )
                        continue
                    claimed = message.payload.get("participant_id")
                    if not isinstance(claimed, str) or not claimed.strip():
                        await ws.send_text(
                            error_message(
                                message.session_id,
                                ProtocolError('join needs a string "participant_id"'),
                            ).to_json()
                        )
                        continue
                elif message.session_id != session_id:
                    await ws.send_text(
                        error_message(
                            message.session_id,
                            ProtocolError("this connection is pinned to another session"),
                        ).to_json()
                    )
                    continue

                at = now()
                try:
                    pre = await run_in_threadpool(engine.tick, message.session_id, at)
                except MeetingFlowError as exc:
                    await ws.send_text(error_message(message.session_id, exc).to_json())
                    continue
                await hub.broadcast(message.session_id, pre)

                acting = participant_id or message.payload.get("participant_id")
                try:
                    result = await run_in_threadpool(
                        engine.handle_command, message, acting, at
                    )
                except MeetingFlowError as exc:
                    await ws.send_text(error_message(message.session_id, exc).to_json())
                    continue

                if participant_id is None:
                    session_id = message.session_id
                    participant_id = acting
                    hub.register(session_id, ws, participant_id)

                for reply in result.reply:
                    await ws.send_text(reply.to_json())
                await hub.broadcast(message.session_id, result.broadcasts)
        except WebSocketDisconnect:
            pass
        finally:
            if session_id is not None:
                hub.unregister(session_id, ws)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="frontend")

    return app
