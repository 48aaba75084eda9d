"""Shared fixtures: background stub adapters and a tiny JSON HTTP helper."""

from __future__ import annotations

import json
import urllib.error
import urllib.request

import pytest

from holocap_adapters.engines import build_engine
from holocap_adapters.server import AdapterServer


def call_json(url: str, body: dict | None = None, method: str | None = None):
    """Returns (status, payload) and never raises on HTTP error statuses."""
    if body is None:
        request = urllib.request.Request(url, method=method or "GET")
    else:
        request = urllib.request.Request(
            url,
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method=method or "POST",
        )
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode("utf-8"))


@pytest.fixture(params=["caption", "transcribe", "emotion", "chat"])
def stub_server(request):
    server = AdapterServer(build_engine(request.param, "stub")).start()
    yield server
    server.shutdown()


def make_server(engine) -> AdapterServer:
    return AdapterServer(engine).start()
