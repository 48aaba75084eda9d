"""Dataset manifest loading, validation, and the audio-missing exclusion step.

A manifest is one JSON document listing every clip with its media location,
duration, audio flag, category, and split tag. The reference dataset is 10,000
clips of which 7,010 form the train/val split and 1,000 the test split of the
"1K-A" protocol; clips outside the protocol carry a null split.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

logger = logging.getLogger(__name__)

SPLITS = ("train_val", "test")
N_CATEGORIES = 20

REFERENCE_TOTAL = 10_000
REFERENCE_TRAIN_VAL = 7_010
REFERENCE_TEST = 1_000


class ManifestError(ValueError):
    """Raised when a manifest violates schema or invariants."""


@dataclass(frozen=True)
class VideoAsset:
    """One dataset clip."""

    video_id: str
    media_path: str
    duration_s: float
    has_audio: bool
    category_id: int
    split: str | None
    original_captions: tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetManifest:
    """Validated set of clips plus the split protocol name."""

    assets: tuple[VideoAsset, ...]
    split_name: str = "1K-A"

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for asset in self.assets:
            if asset.video_id in seen:
                raise ManifestError(f"duplicate video_id: {asset.video_id!r}")
            seen.add(asset.video_id)

    def by_id(self, video_id: str) -> VideoAsset:
        for asset in self.assets:
            if asset.video_id == video_id:
                return asset
        raise KeyError(video_id)

    def ids(self) -> set[str]:
        return {a.video_id for a in self.assets}

    def split_assets(self, split: str) -> tuple[VideoAsset, ...]:
        return tuple(a for a in self.assets if a.split == split)

    def split_sizes(self) -> dict[str, int]:
        return {s: sum(1 for a in self.assets if a.split == s) for s in SPLITS}


def _validate_asset(entry: dict, position: int) -> VideoAsset:
    if not isinstance(entry, dict):
        raise ManifestError(f"asset #{position}: expected an object, got {type(entry).__name__}")
    required = ("video_id", "media_path", "duration_s", "has_audio", "category_id", "split")
    for key in required:
        if key not in entry:
            raise ManifestError(f"asset #{position}: missing field {key!r}")

    video_id = entry["video_id"]
    if not isinstance(video_id, str) or not video_id:
        raise ManifestError(f"asset #{position}: video_id must be a non-empty string")
    if not isinstance(entry["media_path"], str):
        raise ManifestError(f"asset {video_id!r}: media_path must be a string")
    duration = entry["duration_s"]
    if not isinstance(duration, (int, float)) or isinstance(duration, bool) or duration <= 0:
        raise ManifestError(f"asset {video_id!r}: duration_s must be > 0")
    if not isinstance(entry["has_audio"], bool):
        raise ManifestError(f"asset {video_id!r}: has_audio must be a boolean")
    category = entry["category_id"]
    if not isinstance(category, int) or isinstance(category, bool) or not 0 <= category < N_CATEGORIES:
        raise ManifestError(f"asset {video_id!r}: category_id must be an integer in [0, {N_CATEGORIES - 1}]")
    split = entry["split"]
    if split is not None and split not in SPLITS:
        raise ManifestError(f"asset {video_id!r}: split must be one of {SPLITS} or null")
    captions = entry.get("original_captions", [])
    if not isinstance(captions, list) or any(not isinstance(c, str) for c in captions):
        raise ManifestError(f"asset {video_id!r}: original_captions must be a list of strings")

    return VideoAsset(
        video_id=video_id,
        media_path=entry["media_path"],
        duration_s=float(duration),
        has_audio=entry["has_audio"],
        category_id=category,
        split=split,
        original_captions=tuple(captions),
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a manifest JSON document.

    For a full-size reference manifest (10,000 assets) the protocol split
    sizes are asserted: 7,010 train/val and 1,000 test.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc

    if not isinstance(data, dict) or "assets" not in data:
        raise ManifestError(f"{path}: manifest must be an object with an 'assets' list")
    raw_assets = data["assets"]
    if not isinstance(raw_assets, list):
        raise ManifestError(f"{path}: 'assets' must be a list")

    assets = tuple(_validate_asset(entry, i) for i, entry in enumerate(raw_assets))
    manifest = DatasetManifest(assets=assets, split_name=data.get("split_name", "1K-A"))

    if len(assets) == REFERENCE_TOTAL:
        sizes = manifest.split_sizes()
        if sizes["train_val"] != REFERENCE_TRAIN_VAL or sizes["test"] != REFERENCE_TEST:
            raise ManifestError(
                f"full-size manifest must tag {REFERENCE_TRAIN_VAL} train_val and "
                f"{REFERENCE_TEST} test assets, got {sizes}"
            )
    return manifest


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Serialize a manifest back to its JSON document form."""
    doc = {
        "split_name": manifest.split_name,
        "assets": [
            {
                "video_id": a.video_id,
                "media_path": a.media_path,
                "duration_s": a.duration_s,
                "has_audio": a.has_audio,
                "category_id": a.category_id,
                "split": a.split,
                "original_captions": list(a.original_captions),
            }
            for a in manifest.assets
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class ExclusionReport:
    """Counts of audio-less clips removed per split."""

    train_val: int = 0
    test: int = 0
    untagged: int = 0

    @property
    def total(self) -> int:
        return self.train_val + self.test + self.untagged


def exclude_audioless(manifest: DatasetManifest) -> tuple[DatasetManifest, ExclusionReport]:
    """Drop every asset whose manifest flag says it has no audio.

    Idempotent; the report counts exclusions by split tag.
    """
    kept = []
    counts = {"train_val": 0, "test": 0, None: 0}
    for asset in manifest.assets:
        if asset.has_audio:
            kept.append(asset)
        else:
            counts[asset.split] += 1
    report = ExclusionReport(train_val=counts["train_val"], test=counts["test"], untagged=counts[None])
    if report.total:
        logger.info("excluded %d audio-less assets (train_val=%d, test=%d)",
                    report.total, report.train_val, report.test)
    return replace(manifest, assets=tuple(kept)), report
