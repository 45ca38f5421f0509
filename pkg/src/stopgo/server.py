"""HTTP service over the session workflow; the contract the review UI consumes.

JSON request/response bodies with documented field names; errors carry
{"error": {"code", "message", "detail"}}. The layer is deliberately thin:
every endpoint is a one-to-one wrapper over a session-module call, and all
state lives in the session store on disk.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .session import (
    BundleError,
    CompileFailure,
    EditError,
    PhaseError,
    ScriptTranscriptionBackend,
    Session,
    SessionError,
    create_session,
    load_session,
)

__all__ = ["SessionStore", "make_server", "serve_forever"]


class SessionStore:
    """Disk-backed registry of sessions with per-session write serialization."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._registry = threading.Lock()

    def lock(self, session_id: str) -> threading.RLock:
        with self._registry:
            return self._locks.setdefault(session_id, threading.RLock())

    def create(self, bundle_path: str) -> Session:
        session = create_session(bundle_path, self.data_dir)
        with self._registry:
            self._sessions[session.session_id] = session
            self._locks.setdefault(session.session_id, threading.RLock())
        return session

    def get(self, session_id: str) -> Session:
        with self._registry:
            if session_id in self._sessions:
                return self._sessions[session_id]
        session = load_session(self.data_dir, session_id)  # restart recovery path
        with self._registry:
            return self._sessions.setdefault(session_id, session)


def session_view(session: Session) -> dict:
    segments = []
    for i, seg in enumerate(session.segments):
        segments.append(
            {
                "index": i,
                "start": seg.start,
                "end": seg.end,
                "status": seg.status.value,
                "transcript": seg.transcript,
                "flagged": i in session.flagged,
                "duration": (seg.end - seg.start) / session.bundle.video_rate,
            }
        )
    return {
        "id": session.session_id,
        "phase": session.phase.value,
        "bundle_id": session.bundle.bundle_id,
        "video_rate": session.bundle.video_rate,
        "frame_count": session.bundle.frame_count,
        "segments": segments,
        "active_count": len(session.active_segments()),
        "compiled": session.model is not None or session.serialized_model() is not None,
        "last_failure": session.last_failure,
    }


_ROUTES = [
    ("POST", re.compile(r"^/sessions$"), "create"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)$"), "view"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/segments/merge$"), "merge"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/segments/(?P<idx>\d+)/ignore$"), "ignore"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/segments/confirm$"), "confirm_segments"),
    ("PUT", re.compile(r"^/sessions/(?P<sid>[^/]+)/segments/(?P<idx>\d+)/transcript$"), "set_transcript"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/transcripts/confirm$"), "confirm_transcripts"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[^/]+)/compile$"), "compile"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/taskmodel$"), "taskmodel"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/signal$"), "signal"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[^/]+)/segments/(?P<idx>\d+)/thumbnail$"), "thumbnail"),
]

_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
}


class _ApiHandler(BaseHTTPRequestHandler):
    store: SessionStore
    ui_dir: Path | None = None
    protocol_version = "HTTP/1.1"

    # -- plumbing

    def log_message(self, fmt, *args):  # quiet by default; tests parse stdout
        pass

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, payload: dict):
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json; charset=utf-8")

    def _error(self, status: int, code: str, message: str, detail: dict | None = None):
        self._json(status, {"error": {"code": code, "message": message, "detail": detail or {}}})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            raise _BadRequest("request body is not valid JSON") from None
        if not isinstance(parsed, dict):
            raise _BadRequest("request body must be a JSON object")
        return parsed

    # -- dispatch

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def _dispatch(self, method: str):
        path = self.path.split("?", 1)[0]
        for want_method, pattern, name in _ROUTES:
            match = pattern.match(path)
            if match and want_method == method:
                try:
                    getattr(self, f"_handle_{name}")(**match.groupdict())
                except _BadRequest as exc:
                    self._error(400, "bad_request", str(exc))
                except KeyError as exc:
                    self._error(400, "bad_request", f"missing field {exc.args[0]!r}")
                except PhaseError as exc:
                    self._error(409, "conflict", str(exc), {"phase": exc.phase.value})
                except EditError as exc:
                    if exc.not_found:
                        self._error(404, "not_found", str(exc))
                    else:
                        self._error(409, "conflict", str(exc))
                except CompileFailure as exc:
                    if exc.violations:
                        self._error(409, "conflict", str(exc), {"violations": exc.violations})
                    else:
                        self._error(424, "failed_dependency", str(exc))
                except BundleError as exc:
                    self._error(400, "bad_request", str(exc))
                except SessionError as exc:
                    if "no session at" in str(exc):
                        self._error(404, "not_found", str(exc))
                    else:
                        self._error(400, "bad_request", str(exc))
                return
        if method == "GET" and self._serve_static(path):
            return
        self._error(404, "not_found", f"no route for {method} {path}")

    def _serve_static(self, path: str) -> bool:
        if self.ui_dir is None:
            return False
        name = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / name).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            return False
        ctype = _STATIC_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)
        return True

    def _session(self, sid: str) -> Session:
        return self.store.get(sid)

    # -- handlers

    def _handle_create(self):
        body = self._body()
        bundle_path = body.get("bundle_path")
        if not bundle_path:
            raise _BadRequest("field 'bundle_path' is required")
        session = self.store.create(bundle_path)
        self._json(201, session_view(session))

    def _handle_view(self, sid: str):
        self._json(200, session_view(self._session(sid)))

    def _handle_merge(self, sid: str):
        body = self._body()
        session = self._session(sid)
        with self.store.lock(sid):
            session.merge_segments(int(body["first"]), int(body["second"]))
            self._json(200, session_view(session))

    def _handle_ignore(self, sid: str, idx: str):
        session = self._session(sid)
        with self.store.lock(sid):
            session.ignore_segment(int(idx))
            self._json(200, session_view(session))

    def _handle_confirm_segments(self, sid: str):
        session = self._session(sid)
        with self.store.lock(sid):
            backend = ScriptTranscriptionBackend(session.bundle.scripts)
            session.confirm_segments(backend)
            self._json(200, session_view(session))

    def _handle_set_transcript(self, sid: str, idx: str):
        body = self._body()
        session = self._session(sid)
        with self.store.lock(sid):
            session.set_transcript(int(idx), str(body["text"]))
            self._json(200, session_view(session))

    def _handle_confirm_transcripts(self, sid: str):
        session = self._session(sid)
        with self.store.lock(sid):
            session.confirm_transcripts()
            self._json(200, session_view(session))

    def _handle_compile(self, sid: str):
        session = self._session(sid)
        with self.store.lock(sid):
            session.compile()
            self._json(200, {"model": session.serialized_model(), "view": session_view(session)})

    def _handle_taskmodel(self, sid: str):
        document = self._session(sid).serialized_model()
        if document is None:
            self._error(404, "not_found", "session has no compiled task model")
            return
        self._send(200, document.encode("utf-8"), "text/plain; charset=utf-8")

    def _handle_signal(self, sid: str):
        session = self._session(sid)
        path = session.directory / "signal.csv"
        if not path.is_file():
            self._error(404, "not_found", "no diagnostics for session")
            return
        self._send(200, path.read_bytes(), "text/csv; charset=utf-8")

    def _handle_thumbnail(self, sid: str, idx: str):
        session = self._session(sid)
        try:
            data = session.thumbnail_png(int(idx))
        except EditError as exc:
            self._error(404, "not_found", str(exc))
            return
        self._send(200, data, "image/png")


class _BadRequest(Exception):
    pass


def make_server(port: int, data_dir: str | Path, ui_dir: str | Path | None = None) -> ThreadingHTTPServer:
    store = SessionStore(data_dir)
    handler = type(
        "BoundHandler",
        (_ApiHandler,),
        {"store": store, "ui_dir": Path(ui_dir) if ui_dir else None},
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve_forever(port: int, data_dir: str | Path, ui_dir: str | Path | None = None):
    server = make_server(port, data_dir, ui_dir)
    host, bound_port = server.server_address
    print(f"serving on http://{host}:{bound_port} (data: {data_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
