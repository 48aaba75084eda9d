import re
import subprocess
import sys
import time
import urllib.request

import pytest

from holocap_adapters.cli import main
from holocap_adapters.engines import build_engine
from holocap_adapters.server import AdapterServer


def test_serve_unknown_model_exits_nonzero(capsys):
    code = main(["serve", "--kind", "caption", "--model", "nope"])
    assert code == 1
    assert "unknown caption model" in capsys.readouterr().err


def test_serve_unavailable_model_exits_nonzero(capsys, monkeypatch):
    monkeypatch.delenv("ADAPTER_CHAT_UPSTREAM", raising=False)
    code = main(["serve", "--kind", "chat", "--model", "proxy"])
    assert code == 1
    assert "model unavailable" in capsys.readouterr().err


def test_conformance_command_passes_against_stub(capsys):
    server = AdapterServer(build_engine("emotion", "stub")).start()
    try:
        code = main(["conformance", server.url, "--kind", "emotion"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.endswith("result: PASS\n")
    finally:
        server.shutdown()


def test_conformance_command_unreachable_exits_2(capsys):
    code = main(["conformance", "http://127.0.0.1:1", "--kind", "caption", "--timeout", "0.5"])
    assert code == 2
    assert "unreachable" in capsys.readouterr().err


def test_serve_subprocess_answers_healthz():
    process = subprocess.Popen(
        [sys.executable, "-m", "holocap_adapters.cli", "serve", "--kind", "caption"],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    try:
        line = process.stdout.readline()
        match = re.search(r"on port (\d+)", line)
        assert match, f"unexpected banner: {line!r}"
        port = int(match.group(1))
        deadline = time.monotonic() + 10
        payload = None
        while time.monotonic() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz", timeout=2) as r:
                    payload = r.read().decode()
                break
            except OSError:
                time.sleep(0.05)
        assert payload is not None, "healthz never came up"
        assert '"expert": "caption"' in payload
    finally:
        process.terminate()
        try:
            process.wait(timeout=5)
        except subprocess.TimeoutExpired:
            process.kill()
            pytest.fail("serve process did not terminate")
