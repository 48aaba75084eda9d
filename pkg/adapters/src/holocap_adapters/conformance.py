"""Schema-level conformance checks against a running adapter.

The checks exercise canned payloads and assert response schemas only,
never model content, so they hold for any engine behind the endpoint.
An unreachable endpoint raises; a reachable endpoint that violates the
schema produces a failed report.
"""

from __future__ import annotations

import base64
import json
import urllib.error
import urllib.request
from dataclasses import dataclass

from .manifest import EMOTION_VOCABULARY, EXPERT_KINDS

# 1x1 RGB PNG, byte-frozen so checks never depend on an image library
TINY_PNG_BASE64 = (
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAIAAACQd1PeAAAADElEQVR4nGM4oaEBAALUARkFUI+kAAAAAElFTkSuQmCC"
)
# 0.1 s of 16 kHz silence
TINY_PCM16_BASE64 = base64.b64encode(b"\x00" * 3200).decode("ascii")
SAMPLE_RATE_HZ = 16_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ConformanceReport:
    endpoint: str
    kind: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"conformance: {self.kind} adapter at {self.endpoint}"]
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            suffix = f" ({check.detail})" if check.detail and not check.passed else ""
            lines.append(f"  {status}: {check.name}{suffix}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _call(url: str, body: dict | None, timeout: float) -> tuple[int, dict]:
    if body is None:
        request = urllib.request.Request(url, method="GET")
    else:
        request = urllib.request.Request(
            url,
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        raw = exc.read().decode("utf-8", errors="replace")
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            payload = {"error": raw}
        return exc.code, payload


def _canned_request(kind: str) -> dict:
    if kind in ("caption", "emotion"):
        return {"video_id": "conformance", "frame_index": 0, "png_base64": TINY_PNG_BASE64}
    if kind == "transcribe":
        return {
            "video_id": "conformance",
            "pcm16_base64": TINY_PCM16_BASE64,
            "sample_rate_hz": SAMPLE_RATE_HZ,
            "task": "transcribe",
        }
    return {
        "model": "conformance",
        "messages": [{"role": "user", "content": "ping"}],
        "temperature": 0.0,
        "max_tokens": 16,
    }


def _schema_checks(kind: str, status: int, payload: dict) -> list[CheckResult]:
    checks = []
    ok = status == 200 and isinstance(payload, dict)
    checks.append(CheckResult("canned request returns 200 JSON", ok, f"status {status}"))
    if not ok:
        return checks
    if kind == "caption":
        caption = payload.get("caption")
        checks.append(
            CheckResult(
                "response carries a non-empty 'caption' string",
                isinstance(caption, str) and bool(caption),
                repr(payload),
            )
        )
    elif kind == "emotion":
        label = payload.get("label")
        checks.append(
            CheckResult(
                "label is in the emotion vocabulary",
                label in EMOTION_VOCABULARY,
                f"got {label!r}, allowed {list(EMOTION_VOCABULARY)}",
            )
        )
    elif kind == "transcribe":
        checks.append(
            CheckResult(
                "response carries string 'language' and 'text'",
                isinstance(payload.get("language"), str) and isinstance(payload.get("text"), str),
                repr(payload),
            )
        )
    else:
        text = payload.get("text")
        checks.append(
            CheckResult(
                "response carries a non-empty 'text' string",
                isinstance(text, str) and bool(text),
                repr(payload),
            )
        )
    return checks


def conformance_check(endpoint: str, kind: str, timeout: float = 30.0) -> ConformanceReport:
    """Exercise one adapter's schema and return a pass/fail report."""
    if kind not in EXPERT_KINDS:
        raise ValueError(f"unknown expert kind {kind!r}")
    endpoint = endpoint.rstrip("/")
    checks: list[CheckResult] = []

    status, payload = _call(f"{endpoint}/healthz", None, timeout)
    healthy = (
        status == 200
        and isinstance(payload, dict)
        and payload.get("expert") == kind
        and isinstance(payload.get("version"), str)
        and bool(payload.get("version"))
    )
    checks.append(
        CheckResult(
            "healthz reports matching kind and a version",
            healthy,
            f"status {status}, payload {payload!r}",
        )
    )

    url = f"{endpoint}/v1/{kind}"
    status, payload = _call(url, _canned_request(kind), timeout)
    checks.extend(_schema_checks(kind, status, payload))

    if kind == "transcribe":
        translate = {**_canned_request(kind), "task": "translate"}
        status, payload = _call(url, translate, timeout)
        checks.append(
            CheckResult(
                "translate task returns a string 'text'",
                status == 200 and isinstance(payload.get("text"), str),
                f"status {status}, payload {payload!r}",
            )
        )

    broken = dict(_canned_request(kind))
    broken.pop("png_base64", None)
    broken.pop("pcm16_base64", None)
    broken.pop("messages", None)
    status, payload = _call(url, broken, timeout)
    checks.append(
        CheckResult(
            "missing payload field is rejected with 400 and an 'error'",
            status == 400 and isinstance(payload.get("error"), str),
            f"status {status}, payload {payload!r}",
        )
    )

    return ConformanceReport(endpoint=endpoint, kind=kind, checks=tuple(checks))
