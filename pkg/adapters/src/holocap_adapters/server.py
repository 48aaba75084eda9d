"""One-process-per-expert HTTP server speaking the expert wire protocol.

Routes:
  GET  /healthz    -> adapter identity
  POST /v1/<kind>  -> engine inference for the served kind

Every error response is JSON: {"error": "..."} with status 400 for
schema violations, 404 for unknown paths, 405 for wrong methods, and
500 for engine failures.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .engines import EngineError
from .manifest import EXPERT_KINDS

logger = logging.getLogger(__name__)

MAX_BODY_BYTES = 64 * 1024 * 1024


def _field(body: dict, key: str, kind) -> object:
    if key not in body:
        raise ValueError(f"missing field {key!r}")
    value = body[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"field {key!r} must be a number")
        return float(value)
    if kind is int and isinstance(value, bool):
        raise ValueError(f"field {key!r} must be an integer")
    if not isinstance(value, kind):
        raise ValueError(f"field {key!r} must be {kind.__name__}")
    return value


def _base64_field(body: dict, key: str) -> str:
    value = _field(body, key, str)
    try:
        base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f"field {key!r} is not valid base64: {exc}") from exc
    return value


def validate_caption(body: dict) -> None:
    _field(body, "video_id", str)
    _field(body, "frame_index", int)
    _base64_field(body, "png_base64")


validate_emotion = validate_caption


def validate_transcribe(body: dict) -> None:
    _field(body, "video_id", str)
    _base64_field(body, "pcm16_base64")
    rate = _field(body, "sample_rate_hz", int)
    if rate <= 0:
        raise ValueError("field 'sample_rate_hz' must be positive")
    task = _field(body, "task", str)
    if task not in ("transcribe", "translate"):
        raise ValueError(f"field 'task' must be 'transcribe' or 'translate', got {task!r}")


def validate_chat(body: dict) -> None:
    _field(body, "model", str)
    messages = _field(body, "messages", list)
    if not messages:
        raise ValueError("field 'messages' must be a non-empty list")
    for i, message in enumerate(messages):
        if not isinstance(message, dict):
            raise ValueError(f"messages[{i}] must be an object")
        for key in ("role", "content"):
            if not isinstance(message.get(key), str):
                raise ValueError(f"messages[{i}] needs string field {key!r}")
    temperature = _field(body, "temperature", float)
    if temperature < 0:
        raise ValueError("field 'temperature' must be >= 0")
    max_tokens = _field(body, "max_tokens", int)
    if max_tokens < 1:
        raise ValueError("field 'max_tokens' must be >= 1")


VALIDATORS = {
    "caption": validate_caption,
    "transcribe": validate_transcribe,
    "emotion": validate_emotion,
    "chat": validate_chat,
}


class _Handler(BaseHTTPRequestHandler):
    # injected by AdapterServer
    engine = None
    manifest = None

    def log_message(self, fmt, *args):
        logger.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: dict) -> None:
        raw = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def do_GET(self):
        if self.path == "/healthz":
            self._send_json(200, self.manifest.healthz_payload())
        elif self.path == f"/v1/{self.manifest.kind}":
            self._send_json(405, {"error": "use POST"})
        else:
            self._send_json(404, {"error": f"unknown path {self.path!r}"})

    def do_POST(self):
        if self.path != f"/v1/{self.manifest.kind}":
            self._send_json(404, {"error": f"unknown path {self.path!r}"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            self._send_json(400, {"error": f"body exceeds {MAX_BODY_BYTES} bytes"})
            return
        try:
            body = json.loads(self.rfile.read(length).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": f"body is not valid JSON: {exc}"})
            return
        if not isinstance(body, dict):
            self._send_json(400, {"error": "body must be a JSON object"})
            return
        try:
            VALIDATORS[self.manifest.kind](body)
        except ValueError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        try:
            response = self.engine.infer(body)
        except EngineError as exc:
            self._send_json(500, {"error": str(exc)})
            return
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("engine crashed")
            self._send_json(500, {"error": f"engine failure: {exc}"})
            return
        self._send_json(200, response)


class AdapterServer:
    """A running adapter bound to one engine."""

    def __init__(self, engine, host: str = "127.0.0.1", port: int = 0) -> None:
        if engine.manifest.kind not in EXPERT_KINDS:
            raise ValueError(f"engine manifest has unknown kind {engine.manifest.kind!r}")
        handler = type(
            "BoundHandler", (_Handler,), {"engine": engine, "manifest": engine.manifest}
        )
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._httpd.daemon_threads = True
        self._thread: threading.Thread | None = None
        self.manifest = engine.manifest

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        host = self._httpd.server_address[0]
        return f"http://{host}:{self.port}"

    def start(self) -> "AdapterServer":
        # small poll interval so shutdown() returns promptly
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
        )
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(kind: str, model: str, port: int = 0, device: str = "cpu") -> AdapterServer:
    """Build the engine for ``kind``/``model`` and bind a server to ``port``.

    The caller starts it (``start`` for background use, ``serve_forever``
    to block). Engine construction errors propagate.
    """
    from .engines import build_engine

    return AdapterServer(build_engine(kind, model, device=device), port=port)
