"""HTTP surface for sessions plus a live server-sent-event feed.

Every mutation goes through the mission operations under a per-session lock;
the journal is the single source of truth for the event stream, so replays
and reconnects (``Last-Event-ID``) are gapless by construction.
"""

from __future__ import annotations

import asyncio
import json
import threading

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from .errors import (
    ConfigError,
    EmptyBodyError,
    EmptyEnvironmentError,
    EnvSyntaxError,
    SelfLoopError,
    UnknownRoomError,
    WrongPhaseError,
)
from .mission import (
    EVENT_ERROR,
    Session,
    SessionConfig,
    SessionPhase,
)

BIND_ENV = "PARLEY_BIND"
DEFAULT_BIND = "127.0.0.1:8787"

TRANSCRIPT_TAIL = 50
_STREAM_POLL_SECONDS = 0.05


class SessionRegistry:
    """In-memory session table; one lock per session serializes operations."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._table_lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._table_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.RLock()

    def get(self, session_id: str) -> tuple[Session, threading.RLock]:
        with self._table_lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError(session_id)
            return session, self._locks[session_id]


def _error(status: int, code: str, detail: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "detail": detail, **extra})


def _config_error_response(exc: Exception) -> JSONResponse:
    if isinstance(exc, EnvSyntaxError):
        return _error(400, "env_syntax", exc.detail, line=exc.line)
    if isinstance(exc, SelfLoopError):
        return _error(400, "env_self_loop", str(exc), line=exc.line)
    if isinstance(exc, EmptyEnvironmentError):
        return _error(400, "env_empty", str(exc))
    if isinstance(exc, UnknownRoomError):
        return _error(400, "unknown_start_room", str(exc), room=exc.room)
    if isinstance(exc, ConfigError):
        return _error(400, exc.code, exc.detail)
    raise exc


def _snapshot(session: Session) -> dict:
    messages = session.transcript.messages
    return {
        "id": session.id,
        "phase": session.phase.value,
        "positions": dict(session.positions),
        "rounds_used": session.rounds_used,
        "transcript_length": len(messages),
        "transcript_tail": [m.to_dict() for m in messages[-TRANSCRIPT_TAIL:]],
        "plan": session.plan,
        "validation": None if session.last_validation is None else session.last_validation.to_dict(),
        "event_count": len(session.journal),
        "flowchart": _flowchart(session),
        "roster": [
            {"name": p.name, "description": p.description, "start_room": p.start_room}
            for p in session.roster
        ],
        "edges": [list(edge) for edge in session.graph.edges],
        "rooms": list(session.graph.rooms),
    }


def _flowchart(session: Session) -> str:
    from .envgraph import render_flowchart

    return render_flowchart(session.graph)


def create_app(registry: SessionRegistry | None = None) -> FastAPI:
    registry = registry if registry is not None else SessionRegistry()
    app = FastAPI(title="parley gateway")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.registry = registry

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True}

    @app.post("/sessions", status_code=201)
    async def create_session_endpoint(request: Request):
        try:
            document = await request.json()
        except ValueError:
            return _error(400, "bad_config", "request body is not valid JSON")
        try:
            config = SessionConfig.from_document(document)
            session = Session(config)
        except (ConfigError, EnvSyntaxError, SelfLoopError, EmptyEnvironmentError,
                UnknownRoomError) as exc:
            return _config_error_response(exc)
        registry.add(session)
        return JSONResponse(
            status_code=201,
            content={
                "id": session.id,
                "phase": session.phase.value,
                "roster": [
                    {"name": p.name, "description": p.description, "start_room": p.start_room}
                    for p in session.roster
                ],
                "flowchart": _flowchart(session),
            },
        )

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session, lock = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        with lock:
            return _snapshot(session)

    @app.post("/sessions/{session_id}/message")
    async def supervisor_message(session_id: str, request: Request):
        try:
            session, lock = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        try:
            body = await request.json()
        except ValueError:
            body = {}
        text = (body or {}).get("text", "")
        if not isinstance(text, str) or not text.strip():
            return _error(400, "empty_text", "message text is required")
        with lock:
            try:
                if session.phase is SessionPhase.SETUP:
                    session.submit_task(text)
                else:
                    session.supervisor_feedback(text)
            except WrongPhaseError as exc:
                return _error(409, "wrong_phase", str(exc), phase=session.phase.value)
            except EmptyBodyError as exc:
                return _error(400, "empty_text", str(exc))
            return {"phase": session.phase.value}

    @app.post("/sessions/{session_id}/approve")
    def approve_endpoint(session_id: str):
        try:
            session, lock = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        with lock:
            try:
                report = session.approve()
            except WrongPhaseError as exc:
                return _error(409, "wrong_phase", str(exc), phase=session.phase.value)
            return {"phase": session.phase.value, "validation": report.to_dict()}

    @app.post("/sessions/{session_id}/step")
    async def step_endpoint(session_id: str, request: Request):
        try:
            session, lock = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        try:
            body = await request.json()
        except ValueError:
            body = {}
        count = (body or {}).get("count", 1)
        if not isinstance(count, int) or count < 0:
            return _error(400, "bad_count", "count must be a non-negative integer")
        with lock:
            start = len(session.journal)
            if count > 0 and session.phase not in (
                SessionPhase.DISCUSSION, SessionPhase.EXECUTING
            ):
                return _error(
                    409, "wrong_phase",
                    f"step is not allowed in phase {session.phase.value!r}",
                    phase=session.phase.value,
                )
            for _ in range(count):
                if session.phase is SessionPhase.DISCUSSION:
                    session.advance_discussion()
                elif session.phase is SessionPhase.EXECUTING:
                    session.step_execution()
                else:
                    break
                if any(e.type == EVENT_ERROR for e in session.journal[start:]):
                    break
            return {
                "phase": session.phase.value,
                "events": [e.to_dict() for e in session.journal[start:]],
            }

    @app.get("/sessions/{session_id}/transcript")
    def transcript_endpoint(session_id: str):
        try:
            session, lock = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        with lock:
            lines = "".join(
                json.dumps(m.to_dict(), separators=(",", ":"), sort_keys=True) + "\n"
                for m in session.transcript
            )
        return PlainTextResponse(lines, media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/events")
    async def events_endpoint(session_id: str, request: Request):
        try:
            session, _ = registry.get(session_id)
        except KeyError:
            return _error(404, "unknown_session", session_id)
        last_id = _last_event_id(request)

        async def stream():
            cursor = last_id + 1
            while True:
                journal = session.journal
                while cursor < len(journal):
                    event = journal[cursor]
                    payload = json.dumps(event.payload, separators=(",", ":"), sort_keys=True)
                    yield f"id: {event.seq}\nevent: {event.type}\ndata: {payload}\n\n"
                    cursor += 1
                if session.phase in (SessionPhase.COMPLETED, SessionPhase.ABORTED) and cursor >= len(
                    session.journal
                ):
                    return
                if await request.is_disconnected():
                    return
                await asyncio.sleep(_STREAM_POLL_SECONDS)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app


def _last_event_id(request: Request) -> int:
    raw = request.headers.get("last-event-id") or request.query_params.get("last_event_id")
    if raw is None:
        return -1
    try:
        return int(raw)
    except ValueError:
        return -1


app = create_app()
