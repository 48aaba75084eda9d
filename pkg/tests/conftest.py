"""Shared fixtures: synthetic frame-directory videos and manifests."""

from __future__ import annotations

import json
import wave
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from holocap.manifest import VideoAsset


def write_frame_video(
    directory: Path,
    video_id: str,
    duration_s: float = 3.0,
    rate_fps: float = 4.0,
    colors: tuple = ((200, 40, 40), (40, 40, 200)),
    has_audio: bool = True,
    noise: int = 0,
    size: tuple[int, int] = (32, 24),
    audio_rate_hz: int = 16_000,
) -> VideoAsset:
    """Build a frame-directory clip and return its manifest asset."""
    directory.mkdir(parents=True, exist_ok=True)
    width, height = size
    n_frames = int(duration_s * rate_fps)
    rng = np.random.default_rng(abs(hash(video_id)) % 2**32)
    for k in range(n_frames):
        base = np.array(colors[k % len(colors)], dtype=np.int64)
        arr = np.tile(base, (height, width, 1))
        if noise:
            arr = arr + rng.integers(-noise, noise + 1, size=(height, width, 3))
        Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), "RGB").save(
            directory / f"frame_{k:05d}.png"
        )
    (directory / "frames.json").write_text(
        json.dumps(
            {"duration_s": duration_s, "rate_fps": rate_fps, "width": width, "height": height}
        ),
        encoding="utf-8",
    )
    if has_audio:
        with wave.open(str(directory / "audio.wav"), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(audio_rate_hz)
            t = np.arange(int(duration_s * audio_rate_hz))
            fh.writeframes((3000 * np.sin(2 * np.pi * 440 * t / audio_rate_hz)).astype("<i2").tobytes())
    return VideoAsset(
        video_id=video_id,
        media_path=str(directory),
        duration_s=duration_s,
        has_audio=has_audio,
        category_id=0,
        split="test",
        original_captions=(f"original caption for {video_id}",),
    )


@pytest.fixture
def frame_video_factory(tmp_path):
    def build(video_id: str, **kwargs) -> VideoAsset:
        return write_frame_video(tmp_path / "media" / video_id, video_id, **kwargs)

    return build


def reference_manifest_dict() -> dict:
    """Full-size synthetic manifest: 7010/1000 split, 834/354 audio-less."""
    assets = []
    for i in range(10_000):
        if i < 7010:
            split = "train_val"
            has_audio = i >= 834
        elif i < 8010:
            split = "test"
            has_audio = (i - 7010) >= 354
        else:
            split = None
            has_audio = True
        assets.append(
            {
                "video_id": f"video{i}",
                "media_path": f"/data/video{i}",
                "duration_s": 12.0,
                "has_audio": has_audio,
                "category_id": i % 20,
                "split": split,
                "original_captions": [f"caption {i}"],
            }
        )
    return {"split_name": "1K-A", "assets": assets}


# Published benchmark percentages: (training_pairs, query_pairs) -> (r@1, r@5, r@10).
REFERENCE_TABLES = {
    "MMT": {
        ("original", "original"): (24.5, 54.0, 67.7),
        ("original", "improved"): (10.0, 26.3, 39.7),
        ("improved", "original"): (24.1, 53.2, 63.5),
        ("improved", "improved"): (35.2, 60.4, 72.0),
    },
    "HCQ": {
        ("original", "original"): (25.9, 54.8, 69.0),
        ("original", "improved"): (13.1, 27.4, 40.1),
        ("improved", "original"): (26.1, 53.7, 68.9),
        ("improved", "improved"): (36.9, 60.8, 77.2),
    },
    "T2VLAD": {
        ("original", "original"): (29.5, 59.0, 70.0),
        ("original", "improved"): (13.4, 29.5, 40.3),
        ("improved", "original"): (28.8, 59.2, 70.4),
        ("improved", "improved"): (37.4, 61.3, 77.6),
    },
}


def recall_fixture_matrix(p1, p5, p10, n=1000, prefix="q"):
    """Matrix whose r@1/r@5/r@10 are exactly the given percentages of n.

    Each row puts ground truth at 1.0 and (rank - 1) competitors at 2.0,
    so the diagonal rank is exact and float32-representable.
    """
    from holocap.metrics import SimilarityMatrix

    c1 = round(p1 * n / 100)
    c5 = round(p5 * n / 100)
    c10 = round(p10 * n / 100)
    ranks = [1] * c1 + [2] * (c5 - c1) + [6] * (c10 - c5) + [11] * (n - c10)
    scores = np.zeros((n, n))
    for i, rank in enumerate(ranks):
        scores[i, i] = 1.0
        for step in range(1, rank):
            scores[i, (i + step) % n] = 2.0
    return SimilarityMatrix(
        scores=scores,
        query_ids=tuple(f"{prefix}{i}" for i in range(n)),
        video_ids=tuple(f"v{i}" for i in range(n)),
    )


def reference_grid(model_name, n=1000):
    """Benchmark grid reproducing one model's published table."""
    from holocap.metrics import build_grid

    cells = [
        (coords, recall_fixture_matrix(*percs, n=n, prefix=f"{coords[0][0]}{coords[1][0]}q"))
        for coords, percs in REFERENCE_TABLES[model_name].items()
    ]
    return build_grid(model_name, cells)


REFERENCE_DIALOGUE = (
    "It's frozen. That's so cool. Japan really has the coolest store, "
    "I think, in all of them. Amazing."
)

REFERENCE_CAPTIONS = (
    "a woman in a pink dress holding a beer",
    "a woman standing near a freezer case",
    "a close view of a bottled drink",
    "a woman opening a bottle",
    "frost forming on the bottle",
    "a woman shaking the bottle",
    "liquid turning to slush inside the bottle",
    "a woman tilting the bottle toward the camera",
    "a store aisle lined with drink coolers",
    "a hand pointing at a vending machine",
    "a row of chilled bottles on a shelf",
    "a woman taking a sip from the bottle",
    "a man standing beside the cooler",
    "a man raising a bottle to his mouth",
    "a man drinking a beverage",
)


def reference_chunk_facets() -> tuple[tuple[tuple[str, str], ...], str, str, tuple[str, str]]:
    """Facet projections for the frozen 15-frame reference chunk."""
    entries = tuple((f"frame{i + 1:02d}", c) for i, c in enumerate(REFERENCE_CAPTIONS))
    return entries, REFERENCE_DIALOGUE, "surprise", ("firebrick", "rosybrown")


def build_pipeline_env(root: Path, n_videos: int = 3, config_extra: dict | None = None) -> dict:
    """Frame-directory clips, a manifest, and a config file under ``root``."""
    media = root / "media"
    entries = []
    for i in range(n_videos):
        vid = f"clip{i:02d}"
        colors = (((40 + 50 * i) % 256, 40, 40), (40, 40, (90 + 40 * i) % 256))
        asset = write_frame_video(
            media / vid,
            vid,
            duration_s=2.0,
            rate_fps=4.0,
            colors=colors,
            has_audio=(i % 2 == 0),
            noise=6,
        )
        entries.append(
            {
                "video_id": asset.video_id,
                "media_path": asset.media_path,
                "duration_s": asset.duration_s,
                "has_audio": asset.has_audio,
                "category_id": asset.category_id,
                "split": asset.split,
                "original_captions": list(asset.original_captions),
            }
        )
    manifest_path = root / "manifest.json"
    manifest_path.write_text(
        json.dumps({"split_name": "1K-A", "assets": entries}), encoding="utf-8"
    )
    out_dir = root / "out"
    config = {
        "manifest_path": str(manifest_path),
        "output_dir": str(out_dir),
        "seed": 0,
    }
    if config_extra:
        config.update(config_extra)
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return {
        "config_path": config_path,
        "manifest_path": manifest_path,
        "output_dir": out_dir,
        "store_path": out_dir / "annotations.jsonl",
    }


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {status}: {name}", flush=True)
