"""Batch orchestration: annotate videos, evaluate retrieval runs, inspect.

Annotation fans videos out to a worker pool but persists records from the
main thread in manifest order, so a rerun with the same config and mock
backends writes byte-identical stores. All per-video randomness derives
from the config seed hashed with the video id.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ._hash import mix_seed
from .chunk import InformationChunk, compose_chunk, reduce_visual
from .config import PipelineConfig
from .experts import (
    BackendRef,
    HttpClient,
    caption_frame,
    detect_emotion,
    transcribe,
)
from .ingest import extract_audio, sample_frames
from .llm import SamplingParams, compose_holistic
from .manifest import VideoAsset, exclude_audioless, load_manifest
from .metrics import MetricsError, load_similarity, build_grid, render_report
from .prompts import PromptStrategy, render_prompt
from .store import (
    AnnotationRecord,
    existing_keys,
    read_annotations,
    record_to_json_line,
)
from .style import video_style
from .tone import aggregate_tone

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotateSummary:
    written: int
    skipped: int
    failures: tuple[tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _provenance_entry(backend: BackendRef, **extra) -> dict:
    # Mock runs must stay byte-identical, so they carry no wall-clock time.
    entry: dict = {"backend": backend.url, "timestamp": None}
    if not backend.is_mock:
        from datetime import datetime, timezone

        entry["timestamp"] = datetime.now(timezone.utc).isoformat()
    entry.update(extra)
    return entry


def annotate_video(
    asset: VideoAsset,
    config: PipelineConfig,
    backends: dict,
    clients: dict,
    strategy: PromptStrategy,
) -> AnnotationRecord:
    """Run the full per-video flow and return its annotation record."""
    seed_video = mix_seed(config.seed, asset.video_id)
    workdir = None
    if config.frames_decoder or config.audio_decoder:
        workdir = Path(config.output_dir) / "decoded" / asset.video_id
        workdir.mkdir(parents=True, exist_ok=True)

    visual_frames = sample_frames(
        asset, config.visual_fps, decoder_template=config.frames_decoder, workdir=workdir
    )
    captions = [
        caption_frame(f, backends["caption"], http=clients.get("caption"))
        for f in visual_frames
    ]
    visual = reduce_visual(captions)

    audio = extract_audio(asset, decoder_template=config.audio_decoder)
    dialogue = transcribe(audio, backends["transcribe"], http=clients.get("transcribe"))

    tone_frames = sample_frames(
        asset, config.tone_fps, decoder_template=config.frames_decoder, workdir=workdir
    )
    labels = [
        detect_emotion(f, backends["emotion"], http=clients.get("emotion"))
        for f in tone_frames
    ]
    tone = aggregate_tone(labels)

    style_frames = sample_frames(
        asset, config.style_fps, decoder_template=config.frames_decoder, workdir=workdir
    )
    style_seed = mix_seed(seed_video, "style")
    style = video_style(style_frames, seed=style_seed)

    chunk = compose_chunk(visual, dialogue, tone, style)
    prompt = render_prompt(strategy, chunk)
    caption = compose_holistic(
        asset.video_id,
        prompt,
        chunk,
        backends["chat"],
        model_id=config.model_id,
        sampling=SamplingParams(temperature=config.temperature, max_tokens=config.max_tokens),
        http=clients.get("chat"),
    )

    provenance = {
        "visual": _provenance_entry(backends["caption"]),
        "dialogue": _provenance_entry(backends["transcribe"]),
        "tone": _provenance_entry(backends["emotion"]),
        "style": {"backend": "local:kmeans++", "timestamp": None, "seed": style_seed},
        "composer": _provenance_entry(backends["chat"]),
    }
    return AnnotationRecord(
        video_id=asset.video_id,
        strategy=strategy,
        chunk=chunk,
        holistic_caption=caption,
        provenance=provenance,
    )


def _resolve_backends(config: PipelineConfig, mock_all: bool) -> tuple[dict, dict]:
    backends = {}
    clients = {}
    for kind, url in config.backends.items():
        ref = BackendRef("mock" if mock_all else url)
        backends[kind] = ref
        if not ref.is_mock:
            clients[kind] = HttpClient(max_in_flight=config.max_workers)
    return backends, clients


def cmd_annotate(
    config: PipelineConfig,
    force: bool = False,
    only: tuple[str, ...] | None = None,
    strategy: PromptStrategy | None = None,
    mock_all: bool = False,
) -> AnnotateSummary:
    """Annotate every included video, appending records to the store.

    Videos already in the store under the active strategy are skipped
    unless ``force``. Per-video failures are logged and collected; the
    caller decides the exit code.
    """
    manifest = load_manifest(config.manifest_path)
    if config.exclude_audioless:
        manifest, report = exclude_audioless(manifest)
        logger.info(
            "excluded audio-less videos: train_val=%d test=%d untagged=%d",
            report.train_val, report.test, report.untagged,
        )

    assets = list(manifest.assets)
    if only:
        wanted = set(only)
        unknown = wanted - {a.video_id for a in assets}
        if unknown:
            raise ValueError(f"unknown video ids: {sorted(unknown)}")
        assets = [a for a in assets if a.video_id in wanted]

    active = strategy or config.strategy
    done = existing_keys(config.store_path) if not force else set()
    todo = [a for a in assets if (a.video_id, active.value) not in done]
    skipped = len(assets) - len(todo)

    backends, clients = _resolve_backends(config, mock_all)
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    Path(config.store_path).parent.mkdir(parents=True, exist_ok=True)

    failures: list[tuple[str, str]] = []
    written = 0

    def work(asset: VideoAsset):
        return annotate_video(asset, config, backends, clients, active)

    with open(config.store_path, "a", encoding="utf-8") as fh:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            for asset, outcome in zip(todo, pool.map(_trap(work), todo)):
                if isinstance(outcome, Exception):
                    logger.error("annotation failed for %s: %s", asset.video_id, outcome)
                    failures.append((asset.video_id, str(outcome)))
                    continue
                fh.write(record_to_json_line(outcome) + "\n")
                written += 1

    return AnnotateSummary(written=written, skipped=skipped, failures=tuple(failures))


def _trap(fn):
    def wrapped(asset):
        try:
            return fn(asset)
        except Exception as exc:  # per-video isolation, reported in summary
            return exc

    return wrapped


def cmd_evaluate(config: PipelineConfig) -> str:
    """Build every configured model's benchmark grid and render the report."""
    if not config.evaluation_models:
        raise MetricsError("config lists no evaluation models")
    grids = []
    for model in config.evaluation_models:
        cells = []
        sizes = {}
        for coords, path in sorted(model.cell_paths.items()):
            if not Path(path).is_file():
                raise MetricsError(f"{model.name}: missing matrix file {path}")
            matrix = load_similarity(path)
            sizes[coords] = matrix.n
            cells.append((coords, matrix))
        if len(set(sizes.values())) != 1:
            raise MetricsError(f"{model.name}: cell sizes differ: {sizes}")
        grids.append(build_grid(model.name, cells))
    report = render_report(grids, format=config.report_format)
    if config.report_path:
        Path(config.report_path).parent.mkdir(parents=True, exist_ok=True)
        Path(config.report_path).write_text(report, encoding="utf-8")
    return report


def cmd_inspect(
    config: PipelineConfig, video_id: str, strategy: PromptStrategy | None = None
) -> str:
    """Human-readable dump of one stored record."""
    active = strategy or config.strategy
    store = Path(config.store_path)
    records = read_annotations(store) if store.exists() else ()
    record = next(
        (r for r in records if r.video_id == video_id and r.strategy == active), None
    )
    if record is None:
        raise KeyError(f"no record for video {video_id!r} under strategy {active.value!r}")
    return format_record(record)


def format_record(record: AnnotationRecord) -> str:
    chunk: InformationChunk = record.chunk
    prompt = render_prompt(record.strategy, chunk)
    lines = [
        f"video_id: {record.video_id}",
        f"strategy: {record.strategy.value}",
        "",
        "chunk:",
        chunk.rendered,
        "",
        "prompt:",
        prompt.text,
        "",
    ]
    cap = record.holistic_caption
    if cap is None:
        lines.append("caption: (not composed)")
    else:
        lines.append(f"caption ({cap.model_id}):")
        lines.append(cap.text)
        lines.append("")
        v = cap.validation
        lines.append(f"validation: {'passed' if v.passed else 'FAILED'}")
        lines.append(f"  flagged_colors: {', '.join(v.flagged_colors) or '(none)'}")
        lines.append(f"  flagged_emotions: {', '.join(v.flagged_emotions) or '(none)'}")
    lines.append("")
    lines.append("provenance:")
    for facet, entry in record.provenance.items():
        lines.append(f"  {facet}: {entry.get('backend')}")
    return "\n".join(lines) + "\n"
