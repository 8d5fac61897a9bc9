"""HTTP front door: session lifecycle, turns, live trace streaming.

Endpoints (all JSON bodies):

    POST /api/sessions                {"policy": "rules"|"model"|"hybrid"}
    POST /api/sessions/{id}/turns     {"utterance": str, "frame": {...}?}
    GET  /api/sessions/{id}
    GET  /api/model
    POST /api/model                   {"path": str}
    GET  /api/sessions/{id}/stream    server-sent events

Per turn the stream carries, in order: one `frame` event (utterance,
frame, context vector), one `mini_turn` event per trace entry, one
`turn_done` summary. Turn handlers run in worker threads, so a second
turn posted to a session mid-turn is rejected with 409 rather than
interleaving. A model loaded at runtime applies to sessions created
afterwards; running sessions keep the snapshot they started with.
"""

from __future__ import annotations

import asyncio
import json
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import _kernels
from .errors import EtadmError, ModelMissing, SchemaError
from .network import ModelParams, load_model
from .nlu import extract_frame
from .rulebook import Rulebook, bundled_db_path, bundled_rulebook, load_rulebook
from .runtime import POLICIES, DmSession, run_turn
from .state import DomainDb, SemanticFrame, event_for_intent, load_db


@dataclass
class _SessionEntry:
    session: DmSession
    transcript: list[dict] = field(default_factory=list)
    turns: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list[tuple[asyncio.AbstractEventLoop, asyncio.Queue]] = field(
        default_factory=list
    )


class ServiceState:
    def __init__(self, rulebook: Rulebook, db: DomainDb, params: ModelParams | None):
        self.rulebook = rulebook
        self.db = db
        self.params = params
        self.sessions: dict[str, _SessionEntry] = {}


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _publish(entry: _SessionEntry, message: dict) -> None:
    for loop, queue in list(entry.subscribers):
        loop.call_soon_threadsafe(queue.put_nowait, message)


def _turn_payload(turn_index: int, utterance: str, frame: SemanticFrame, result) -> dict:
    return {
        "turn_index": turn_index,
        "utterance": utterance,
        "frame": frame.to_dict(),
        "result": result.to_dict(),
    }


def _run_and_record(
    sid: str, entry: _SessionEntry, utterance: str, frame: SemanticFrame
) -> dict:
    result = run_turn(
        entry.session, event_for_intent(frame.intent), frame, utterance=utterance
    )
    turn_index = entry.session.state.turn_index
    payload = _turn_payload(turn_index, utterance, frame, result)
    entry.turns.append(payload)
    if utterance:
        entry.transcript.append({"speaker": "usr", "text": utterance})
    if result.response:
        entry.transcript.append({"speaker": "sys", "text": result.response})

    base = {"session_id": sid, "turn_index": turn_index}
    _publish(
        entry,
        {
            **base,
            "type": "frame",
            "payload": {
                "utterance": utterance,
                "frame": frame.to_dict(),
                "context_feature": payload["result"]["context_feature"],
            },
        },
    )
    for trace in result.trace:
        _publish(entry, {**base, "type": "mini_turn", "payload": trace.to_dict()})
    _publish(
        entry,
        {
            **base,
            "type": "turn_done",
            "payload": {
                "sequence": list(result.sequence),
                "response": result.response,
                "truncated": result.truncated,
            },
        },
    )
    return payload


def create_app(
    rulebook_path: str | Path | None = None,
    db_path: str | Path | None = None,
    model_path: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    rulebook = load_rulebook(rulebook_path) if rulebook_path else bundled_rulebook()
    db = load_db(db_path if db_path else bundled_db_path())
    params = load_model(model_path) if model_path else None
    state = ServiceState(rulebook, db, params)

    app = FastAPI(title="dialogue manager service")
    app.state.dm = state

    @app.post("/api/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            body = {}
        policy = body.get("policy", "rules") if isinstance(body, dict) else "rules"
        if policy not in POLICIES:
            return _error(400, f"unknown policy {policy!r}")
        try:
            session = DmSession(rulebook, db, policy=policy, params=state.params)
        except ModelMissing as exc:
            return _error(409, str(exc))
        sid = secrets.token_hex(8)
        entry = _SessionEntry(session=session)
        state.sessions[sid] = entry
        payload = _run_and_record(sid, entry, "", SemanticFrame(intent="start"))
        return {
            "session_id": sid,
            "policy": policy,
            "action_names": list(rulebook.action_names()),
            "greeting": payload["result"]["response"],
            "turn": payload,
        }

    @app.post("/api/sessions/{sid}/turns")
    def post_turn(sid: str, body: dict):
        entry = state.sessions.get(sid)
        if entry is None:
            return _error(404, f"unknown session {sid!r}")
        utterance = body.get("utterance")
        if not isinstance(utterance, str) or not utterance.strip():
            return _error(400, "utterance must be a nonempty string")
        try:
            if "frame" in body and body["frame"] is not None:
                frame = SemanticFrame.from_dict(body["frame"])
            else:
                frame = extract_frame(utterance, db)
        except SchemaError as exc:
            return _error(400, str(exc))
        if not entry.lock.acquire(blocking=False):
            return _error(409, "session is busy with another turn")
        try:
            payload = _run_and_record(sid, entry, utterance, frame)
        except EtadmError as exc:
            return _error(409, str(exc))
        finally:
            entry.lock.release()
        return payload

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        entry = state.sessions.get(sid)
        if entry is None:
            return _error(404, f"unknown session {sid!r}")
        return {
            "session_id": sid,
            "policy": entry.session.policy,
            "transcript": entry.transcript,
            "turns": entry.turns,
        }

    @app.get("/api/model")
    def get_model():
        info = {
            "loaded": state.params is not None,
            "action_names": list(rulebook.action_names()),
            "backend": _kernels.BACKEND_NAME,
        }
        if state.params is not None:
            info["dims"] = {
                "d_ctx": state.params.d_ctx,
                "d_hidden": state.params.d_hidden,
                "n_actions": state.params.n_actions,
            }
            info["encoder"] = state.params.encoder.to_dict()
        return info

    @app.post("/api/model")
    def post_model(body: dict):
        path = body.get("path")
        if not isinstance(path, str) or not path:
            return _error(400, "path must be a nonempty string")
        try:
            state.params = load_model(path)
        except FileNotFoundError:
            return _error(400, f"no model file at {path!r}")
        except SchemaError as exc:
            return _error(400, str(exc))
        return get_model()

    @app.get("/api/sessions/{sid}/stream")
    async def stream(sid: str):
        entry = state.sessions.get(sid)
        if entry is None:
            return _error(404, f"unknown session {sid!r}")

        queue: asyncio.Queue = asyncio.Queue()
        pair = (asyncio.get_running_loop(), queue)
        entry.subscribers.append(pair)

        async def events():
            try:
                while True:
                    message = await queue.get()
                    body = json.dumps(message, separators=(",", ":"))
                    yield f"event: {message['type']}\ndata: {body}\n\n"
            finally:
                entry.subscribers.remove(pair)

        return StreamingResponse(events(), media_type="text/event-stream")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
