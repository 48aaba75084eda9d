"""Append-only JSON-Lines store for annotation records.

One record per line, UTF-8, fields in a fixed order so identical runs
produce identical bytes. The store is keyed by (video_id, strategy): later
lines supersede earlier ones at read time, which makes interrupted batch
runs safe to resume by appending.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .chunk import CHUNK_VERSION, InformationChunk
from .experts import DialogueAnnotation, VisualAnnotation
from .llm import HolisticCaption, SamplingParams, ValidationReport
from .prompts import PromptStrategy
from .style import StyleAnnotation
from .tone import ToneAnnotation


class StoreError(ValueError):
    """Record fails referential or schema checks."""


@dataclass(frozen=True)
class AnnotationRecord:
    """Everything produced for one video under one prompt strategy."""

    video_id: str
    strategy: PromptStrategy
    chunk: InformationChunk
    holistic_caption: HolisticCaption | None
    provenance: dict

    def __post_init__(self) -> None:
        if not self.video_id:
            raise StoreError("record needs a video_id")
        cap = self.holistic_caption
        if cap is not None:
            if cap.video_id != self.video_id:
                raise StoreError("caption video_id does not match record")
            if cap.strategy != self.strategy:
                raise StoreError("caption strategy does not match record")


def _chunk_to_json(chunk: InformationChunk) -> dict:
    return {
        "version": CHUNK_VERSION,
        "rendered": chunk.rendered,
        "visual": [[label, caption] for label, caption in chunk.visual.entries],
        "dialogue": {
            "transcript_en": chunk.dialogue.transcript_en,
            "detected_language": chunk.dialogue.detected_language,
            "was_translated": chunk.dialogue.was_translated,
            "present": chunk.dialogue.present,
        },
        "tone": {
            "tone": chunk.tone.tone,
            "counts": dict(chunk.tone.counts),
            "frames_considered": chunk.tone.frames_considered,
        },
        "style": {
            "top_colors": list(chunk.style.top_colors),
            "histogram": dict(chunk.style.histogram),
            "per_frame": [
                [index, list(c1), list(c2)] for index, c1, c2 in chunk.style.per_frame
            ],
        },
    }


def _chunk_from_json(obj: dict) -> InformationChunk:
    if obj.get("version") != CHUNK_VERSION:
        raise StoreError(f"unsupported chunk version {obj.get('version')!r}")
    visual = VisualAnnotation(entries=tuple((l, c) for l, c in obj["visual"]))
    d = obj["dialogue"]
    dialogue = DialogueAnnotation(
        transcript_en=d["transcript_en"],
        detected_language=d["detected_language"],
        was_translated=d["was_translated"],
        present=d["present"],
    )
    t = obj["tone"]
    tone = ToneAnnotation(
        tone=t["tone"], counts=dict(t["counts"]), frames_considered=t["frames_considered"]
    )
    s = obj["style"]
    style = StyleAnnotation(
        top_colors=tuple(s["top_colors"]),
        histogram=dict(s["histogram"]),
        per_frame=tuple(
            (index, tuple(c1), tuple(c2)) for index, c1, c2 in s["per_frame"]
        ),
    )
    return InformationChunk(
        visual=visual, dialogue=dialogue, tone=tone, style=style, rendered=obj["rendered"]
    )


def _caption_to_json(cap: HolisticCaption | None) -> dict | None:
    if cap is None:
        return None
    return {
        "strategy": cap.strategy.value,
        "prompt_hash": f"{cap.prompt_hash:016x}",
        "text": cap.text,
        "model_id": cap.model_id,
        "sampling": {
            "temperature": cap.sampling.temperature,
            "max_tokens": cap.sampling.max_tokens,
            "seed": cap.sampling.seed,
        },
        "validation": {
            "flagged_colors": list(cap.validation.flagged_colors),
            "flagged_emotions": list(cap.validation.flagged_emotions),
            "passed": cap.validation.passed,
        },
    }


def _caption_from_json(obj: dict | None, video_id: str) -> HolisticCaption | None:
    if obj is None:
        return None
    sampling = obj["sampling"]
    validation = obj["validation"]
    return HolisticCaption(
        video_id=video_id,
        strategy=PromptStrategy(obj["strategy"]),
        prompt_hash=int(obj["prompt_hash"], 16),
        text=obj["text"],
        model_id=obj["model_id"],
        sampling=SamplingParams(
            temperature=sampling["temperature"],
            max_tokens=sampling["max_tokens"],
            seed=sampling["seed"],
        ),
        validation=ValidationReport(
            flagged_colors=tuple(validation["flagged_colors"]),
            flagged_emotions=tuple(validation["flagged_emotions"]),
            passed=validation["passed"],
        ),
    )


def record_to_json_line(record: AnnotationRecord) -> str:
    """Serialize one record to its canonical single-line JSON form."""
    obj = {
        "video_id": record.video_id,
        "strategy": record.strategy.value,
        "chunk": _chunk_to_json(record.chunk),
        "holistic_caption": _caption_to_json(record.holistic_caption),
        "provenance": record.provenance,
    }
    return json.dumps(obj, ensure_ascii=False)


def record_from_json_line(line: str) -> AnnotationRecord:
    obj = json.loads(line)
    video_id = obj["video_id"]
    return AnnotationRecord(
        video_id=video_id,
        strategy=PromptStrategy(obj["strategy"]),
        chunk=_chunk_from_json(obj["chunk"]),
        holistic_caption=_caption_from_json(obj["holistic_caption"], video_id),
        provenance=obj["provenance"],
    )


def write_annotations(
    records: Iterable[AnnotationRecord],
    path: str | Path,
    valid_ids: Iterable[str] | None = None,
) -> int:
    """Write records as JSON lines, replacing any existing file.

    Args:
      records: records to persist, written in the given order.
      path: destination file.
      valid_ids: when given, every record's video_id must be in this set.

    Returns:
      Number of records written.
    """
    known = set(valid_ids) if valid_ids is not None else None
    lines = []
    for record in records:
        if known is not None and record.video_id not in known:
            raise StoreError(f"record references unknown video_id {record.video_id!r}")
        lines.append(record_to_json_line(record))
    text = "".join(line + "\n" for line in lines)
    Path(path).write_text(text, encoding="utf-8")
    return len(lines)


def read_annotations(path: str | Path) -> tuple[AnnotationRecord, ...]:
    """Read records, later (video_id, strategy) lines superseding earlier ones."""
    merged: dict[tuple[str, str], AnnotationRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = record_from_json_line(line)
            except (KeyError, ValueError, TypeError) as exc:
                raise StoreError(f"{path}:{line_no}: bad record: {exc}") from exc
            merged[(record.video_id, record.strategy.value)] = record
    return tuple(merged.values())


def existing_keys(path: str | Path) -> set[tuple[str, str]]:
    """(video_id, strategy) pairs already present, for resumable runs."""
    p = Path(path)
    if not p.exists():
        return set()
    return {(r.video_id, r.strategy.value) for r in read_annotations(p)}
