"""Process-level check that the consumer pipeline runs against stub adapters.

The consumer is driven through its published CLI in a subprocess and talks
to the adapters over HTTP only; nothing from the consumer package is
imported here.
"""

import base64
import json
import shutil
import subprocess
import wave

import pytest

from holocap_adapters.conformance import TINY_PNG_BASE64
from holocap_adapters.engines import build_engine
from holocap_adapters.manifest import EXPERT_KINDS
from holocap_adapters.server import AdapterServer

CONSUMER_CLI = shutil.which("holocap")

pytestmark = pytest.mark.skipif(
    CONSUMER_CLI is None, reason="consumer CLI not installed on PATH"
)


def _write_clip(directory, n_frames=8, rate_fps=4.0):
    directory.mkdir(parents=True)
    png = base64.b64decode(TINY_PNG_BASE64)
    for k in range(n_frames):
        (directory / f"frame_{k:05d}.png").write_bytes(png)
    (directory / "frames.json").write_text(
        json.dumps(
            {"duration_s": n_frames / rate_fps, "rate_fps": rate_fps, "width": 1, "height": 1}
        ),
        encoding="utf-8",
    )
    with wave.open(str(directory / "audio.wav"), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(16_000)
        fh.writeframes(b"\x00" * (16_000 * 2 * 2))


def test_consumer_annotates_through_running_adapters(tmp_path):
    servers = {kind: AdapterServer(build_engine(kind, "stub")).start() for kind in EXPERT_KINDS}
    try:
        _write_clip(tmp_path / "media" / "clip00")
        (tmp_path / "manifest.json").write_text(
            json.dumps(
                {
                    "split_name": "wire-check",
                    "assets": [
                        {
                            "video_id": "clip00",
                            "media_path": str(tmp_path / "media" / "clip00"),
                            "duration_s": 2.0,
                            "has_audio": True,
                            "category_id": 0,
                            "split": "test",
                            "original_captions": ["a clip"],
                        }
                    ],
                }
            ),
            encoding="utf-8",
        )
        (tmp_path / "config.json").write_text(
            json.dumps(
                {
                    "manifest_path": "manifest.json",
                    "output_dir": "out",
                    "backends": {kind: server.url for kind, server in servers.items()},
                }
            ),
            encoding="utf-8",
        )

        result = subprocess.run(
            [CONSUMER_CLI, "--config", str(tmp_path / "config.json"), "annotate"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert result.returncode == 0, result.stderr
        assert "wrote 1 record(s)" in result.stdout

        record = json.loads((tmp_path / "out" / "annotations.jsonl").read_text(encoding="utf-8"))
        caption = record["holistic_caption"]
        assert caption["text"].startswith("stub completion ")
        assert record["chunk"]["rendered"].startswith('[visual: "(frame01: stub object ')
    finally:
        for server in servers.values():
            server.shutdown()
