"""Uniform client for the three perception experts.

Each operation either talks HTTP + JSON to a backend service (POST
``/v1/caption``, ``/v1/transcribe``, ``/v1/emotion``) or, with the ``mock``
backend, computes a deterministic stand-in locally. Mock outputs are pure
functions of the request payload bytes, which keeps batch runs byte-identical
across reruns.
"""

from __future__ import annotations

import base64
import io
import logging
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable

import requests
from PIL import Image

from ._hash import canonical_json_bytes, hash64, hash64_hex
from .ingest import AudioTrack, FrameSample
from .tone import EMOTIONS, EMOTION_VOCABULARY

logger = logging.getLogger(__name__)

MOCK = "mock"

DEFAULT_MAX_IN_FLIGHT = 4
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_S = 0.2
DEFAULT_TIMEOUT_S = 60.0


class ExpertError(Exception):
    """Base failure talking to an expert backend."""


class TransportError(ExpertError):
    """Connection-level failure that exhausted the retry budget."""


class ProtocolError(ExpertError):
    """Backend answered, but outside the wire contract."""


@dataclass(frozen=True)
class BackendRef:
    """Where an expert lives: ``mock`` or an HTTP base URL."""

    url: str

    @property
    def is_mock(self) -> bool:
        return self.url == MOCK


def frame_label(n: int) -> str:
    """1-based frame label: frame01..frame99, then frame100 unpadded beyond."""
    if n < 1:
        raise ValueError("frame labels are 1-based")
    return f"frame{n:02d}"


_LABEL_RE = re.compile(r"^frame(\d{2,})$")


@dataclass(frozen=True)
class VisualAnnotation:
    """Ordered per-frame captions, labeled frameNN."""

    entries: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("visual annotation needs at least one entry")
        last = 0
        for label, caption in self.entries:
            m = _LABEL_RE.match(label)
            if not m:
                raise ValueError(f"bad frame label {label!r}")
            idx = int(m.group(1))
            if idx <= last:
                raise ValueError(f"frame labels must be strictly increasing, got {label!r} after {last}")
            last = idx
            if not caption:
                raise ValueError(f"{label}: empty caption")

    def captions(self) -> tuple[str, ...]:
        return tuple(caption for _, caption in self.entries)


def visual_annotation_from_captions(captions: list[str] | tuple[str, ...]) -> VisualAnnotation:
    """Label a caption sequence frame01..frameNN in order."""
    return VisualAnnotation(
        entries=tuple((frame_label(i + 1), c) for i, c in enumerate(captions))
    )


@dataclass(frozen=True)
class DialogueAnnotation:
    """English transcript of the clip's speech, if any."""

    transcript_en: str
    detected_language: str
    was_translated: bool
    present: bool

    def __post_init__(self) -> None:
        if not self.present and (self.transcript_en or self.was_translated):
            raise ValueError("absent dialogue must have empty transcript and no translation")


ABSENT_DIALOGUE = DialogueAnnotation(
    transcript_en="", detected_language="", was_translated=False, present=False
)


class HttpClient:
    """Shared per-backend HTTP plumbing: in-flight cap, bounded retries.

    ``transport(method, url, body, timeout) -> (status, parsed_json)`` is
    injectable for tests; the default rides a requests.Session.
    """

    def __init__(
        self,
        transport: Callable | None = None,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        retries: int = DEFAULT_RETRIES,
        backoff_s: float = DEFAULT_BACKOFF_S,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._transport = transport or self._requests_transport
        self._limiter = threading.Semaphore(max_in_flight)
        self._retries = retries
        self._backoff_s = backoff_s
        self._timeout_s = timeout_s
        self._sleep = sleep
        self._session = requests.Session() if transport is None else None

    def _requests_transport(self, method: str, url: str, body: dict | None, timeout: float):
        resp = self._session.request(method, url, json=body, timeout=timeout)
        try:
            payload = resp.json()
        except ValueError:
            payload = None
        return resp.status_code, payload

    def request_json(self, method: str, url: str, body: dict | None = None) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self._retries + 1):
            if attempt:
                self._sleep(self._backoff_s * (2 ** (attempt - 1)))
            with self._limiter:
                try:
                    status, payload = self._transport(method, url, body, self._timeout_s)
                except (requests.ConnectionError, requests.Timeout, ConnectionError, TimeoutError) as exc:
                    last_exc = exc
                    logger.warning("transport failure on %s (attempt %d): %s", url, attempt + 1, exc)
                    continue
            if status >= 500 or status == 429:
                last_exc = ProtocolError(f"{url}: retryable status {status}")
                continue
            if status != 200:
                detail = payload.get("error") if isinstance(payload, dict) else None
                raise ProtocolError(f"{url}: status {status}" + (f": {detail}" if detail else ""))
            if not isinstance(payload, dict):
                raise ProtocolError(f"{url}: response body is not a JSON object")
            return payload
        raise TransportError(f"{url}: gave up after {self._retries + 1} attempts") from last_exc


def png_base64(frame: FrameSample) -> str:
    """Frame pixels as base64 PNG, fixed compression for reproducibility."""
    img = Image.frombytes("RGB", (frame.width, frame.height), frame.pixels)
    buf = io.BytesIO()
    img.save(buf, format="PNG", compress_level=6)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _frame_request_body(frame: FrameSample) -> dict:
    return {
        "video_id": frame.video_id,
        "frame_index": frame.index,
        "png_base64": png_base64(frame),
    }


def caption_frame(frame: FrameSample, backend: BackendRef, http: HttpClient | None = None) -> str:
    """Single-sentence caption for one frame."""
    body = _frame_request_body(frame)
    if backend.is_mock:
        return f"mock object at {hash64_hex(canonical_json_bytes(body))[:8]}"
    http = http or HttpClient()
    payload = http.request_json("POST", f"{backend.url}/v1/caption", body)
    caption = payload.get("caption")
    if not isinstance(caption, str):
        raise ProtocolError(f"caption backend returned no 'caption' field: {payload!r}")
    if not caption:
        raise ProtocolError("caption backend returned an empty caption")
    return caption


def _is_english(code: str) -> bool:
    code = code.lower()
    return code == "en" or code.startswith("en-")


def transcribe(
    audio: AudioTrack | None, backend: BackendRef, http: HttpClient | None = None
) -> DialogueAnnotation:
    """English transcript of a clip's audio.

    Absent audio yields the distinguished absent annotation. When the backend
    detects a non-English language, the call is repeated with the translate
    task so the transcript comes back in English.
    """
    if audio is None:
        return ABSENT_DIALOGUE

    body = {
        "video_id": audio.video_id,
        "pcm16_base64": base64.b64encode(audio.pcm16_bytes()).decode("ascii"),
        "sample_rate_hz": audio.sample_rate_hz,
        "task": "transcribe",
    }
    if backend.is_mock:
        text = f"mock speech {audio.duration_s:.1f}"
        return DialogueAnnotation(
            transcript_en=text, detected_language="en", was_translated=False, present=True
        )

    http = http or HttpClient()
    url = f"{backend.url}/v1/transcribe"
    first = http.request_json("POST", url, body)
    language = first.get("language")
    text = first.get("text")
    if not isinstance(language, str) or not isinstance(text, str):
        raise ProtocolError(f"transcribe backend returned malformed payload: {first!r}")
    if _is_english(language):
        return DialogueAnnotation(
            transcript_en=text, detected_language=language, was_translated=False, present=True
        )
    translated = http.request_json("POST", url, {**body, "task": "translate"})
    text_en = translated.get("text")
    if not isinstance(text_en, str):
        raise ProtocolError(f"translate task returned malformed payload: {translated!r}")
    return DialogueAnnotation(
        transcript_en=text_en, detected_language=language, was_translated=True, present=True
    )


def detect_emotion(frame: FrameSample, backend: BackendRef, http: HttpClient | None = None) -> str:
    """One of the 8 emotion labels, or ``no_face`` when no face is found."""
    body = _frame_request_body(frame)
    if backend.is_mock:
        return EMOTIONS[hash64(canonical_json_bytes(body)) % len(EMOTIONS)]
    http = http or HttpClient()
    payload = http.request_json("POST", f"{backend.url}/v1/emotion", body)
    label = payload.get("label")
    if label not in EMOTION_VOCABULARY:
        raise ProtocolError(f"emotion backend returned out-of-vocabulary label {label!r}")
    return label


def healthz(backend: BackendRef, http: HttpClient | None = None) -> dict:
    """Service identity check: {"expert": kind, "version": ...}."""
    if backend.is_mock:
        return {"expert": "mock", "version": "builtin"}
    http = http or HttpClient()
    return http.request_json("GET", f"{backend.url}/healthz")
