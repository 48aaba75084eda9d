"""Declarative pipeline configuration, one JSON document.

Defaults mirror the reference pipeline: visual at 4 fps, tone and style at
2 fps, rule strategy, mock backends. ``HOLOCAP_CONFIG`` supplies the path
when the CLI flag is absent.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .prompts import PromptStrategy

ENV_CONFIG = "HOLOCAP_CONFIG"

DEFAULT_VISUAL_FPS = 4.0
DEFAULT_TONE_FPS = 2.0
DEFAULT_STYLE_FPS = 2.0
DEFAULT_MAX_WORKERS = 4
DEFAULT_SEED = 0

BACKEND_KINDS = ("caption", "transcribe", "emotion", "chat")


class ConfigError(ValueError):
    """Config file missing, unparsable, or schema-invalid."""


@dataclass(frozen=True)
class EvaluationModel:
    name: str
    cell_paths: dict  # (training, query) "a/b" key -> matrix path


@dataclass(frozen=True)
class PipelineConfig:
    manifest_path: str
    output_dir: str
    store_path: str
    visual_fps: float = DEFAULT_VISUAL_FPS
    tone_fps: float = DEFAULT_TONE_FPS
    style_fps: float = DEFAULT_STYLE_FPS
    strategy: PromptStrategy = PromptStrategy.RULE
    seed: int = DEFAULT_SEED
    max_workers: int = DEFAULT_MAX_WORKERS
    exclude_audioless: bool = False
    backends: dict = field(default_factory=lambda: {k: "mock" for k in BACKEND_KINDS})
    model_id: str = "composer-7b"
    temperature: float = 0.2
    max_tokens: int = 300
    frames_decoder: str | None = None
    audio_decoder: str | None = None
    evaluation_models: tuple[EvaluationModel, ...] = ()
    report_format: str = "text_table"
    report_path: str | None = None


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: {key!r} must be {kind}, got {type(value).__name__}")
    return value


def _positive(value: float, name: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def config_from_dict(obj: dict, base_dir: Path | None = None) -> PipelineConfig:
    """Validate a parsed JSON document into a PipelineConfig.

    Relative paths are resolved against ``base_dir`` when given (the config
    file's directory), so configs can travel with their data.
    """
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")

    def resolve(p: str) -> str:
        path = Path(p)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return str(path)

    where = "config"
    manifest_path = resolve(_require(obj, "manifest_path", str, where))
    output_dir = resolve(_require(obj, "output_dir", str, where))
    store_path = resolve(obj["store_path"]) if "store_path" in obj else str(
        Path(output_dir) / "annotations.jsonl"
    )

    visual_fps = _positive(obj.get("visual_fps", DEFAULT_VISUAL_FPS), "visual_fps")
    tone_fps = _positive(obj.get("tone_fps", DEFAULT_TONE_FPS), "tone_fps")
    style_fps = _positive(obj.get("style_fps", DEFAULT_STYLE_FPS), "style_fps")

    strategy_raw = obj.get("strategy", PromptStrategy.RULE.value)
    try:
        strategy = PromptStrategy(str(strategy_raw).replace("-", "_"))
    except ValueError as exc:
        raise ConfigError(f"unknown strategy {strategy_raw!r}") from exc

    seed = obj.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")

    max_workers = obj.get("max_workers", DEFAULT_MAX_WORKERS)
    if not isinstance(max_workers, int) or isinstance(max_workers, bool) or max_workers < 1:
        raise ConfigError(f"max_workers must be a positive integer, got {max_workers!r}")

    exclude = obj.get("exclude_audioless", False)
    if not isinstance(exclude, bool):
        raise ConfigError("exclude_audioless must be a boolean")

    backends = {k: "mock" for k in BACKEND_KINDS}
    raw_backends = obj.get("backends", {})
    if not isinstance(raw_backends, dict):
        raise ConfigError("backends must be an object")
    for kind, url in raw_backends.items():
        if kind not in BACKEND_KINDS:
            raise ConfigError(f"unknown backend kind {kind!r}")
        if not isinstance(url, str) or not url:
            raise ConfigError(f"backend {kind!r} must be 'mock' or a base URL")
        backends[kind] = url

    model_id = obj.get("model_id", "composer-7b")
    if not isinstance(model_id, str) or not model_id:
        raise ConfigError("model_id must be a non-empty string")
    temperature = obj.get("temperature", 0.2)
    if not isinstance(temperature, (int, float)) or isinstance(temperature, bool) or temperature < 0:
        raise ConfigError(f"temperature must be >= 0, got {temperature!r}")
    max_tokens = obj.get("max_tokens", 300)
    if not isinstance(max_tokens, int) or isinstance(max_tokens, bool) or max_tokens < 1:
        raise ConfigError(f"max_tokens must be a positive integer, got {max_tokens!r}")

    frames_decoder = obj.get("frames_decoder")
    audio_decoder = obj.get("audio_decoder")
    for name, tpl in (("frames_decoder", frames_decoder), ("audio_decoder", audio_decoder)):
        if tpl is not None and (not isinstance(tpl, str) or not tpl):
            raise ConfigError(f"{name} must be a non-empty command template or omitted")

    models: list[EvaluationModel] = []
    evaluation = obj.get("evaluation", {})
    if not isinstance(evaluation, dict):
        raise ConfigError("evaluation must be an object")
    for entry in evaluation.get("models", []):
        if not isinstance(entry, dict):
            raise ConfigError("evaluation.models entries must be objects")
        name = _require(entry, "name", str, "evaluation model")
        cells = _require(entry, "cells", dict, f"evaluation model {name!r}")
        paths: dict = {}
        for key, p in cells.items():
            parts = key.split("/")
            if len(parts) != 2 or not all(x in ("original", "improved") for x in parts):
                raise ConfigError(f"bad cell key {key!r}; use 'training/query' settings")
            if not isinstance(p, str):
                raise ConfigError(f"cell {key!r} path must be a string")
            paths[(parts[0], parts[1])] = resolve(p)
        if len(paths) != 4:
            raise ConfigError(f"evaluation model {name!r} needs its four cells, got {len(paths)}")
        models.append(EvaluationModel(name=name, cell_paths=paths))

    report_format = evaluation.get("format", "text_table")
    if report_format not in ("text_table", "csv"):
        raise ConfigError(f"unknown report format {report_format!r}")
    report_path = evaluation.get("report_path")
    if report_path is not None:
        if not isinstance(report_path, str):
            raise ConfigError("evaluation.report_path must be a string")
        report_path = resolve(report_path)

    return PipelineConfig(
        manifest_path=manifest_path,
        output_dir=output_dir,
        store_path=store_path,
        visual_fps=visual_fps,
        tone_fps=tone_fps,
        style_fps=style_fps,
        strategy=strategy,
        seed=seed,
        max_workers=max_workers,
        exclude_audioless=exclude,
        backends=backends,
        model_id=model_id,
        temperature=float(temperature),
        max_tokens=max_tokens,
        frames_decoder=frames_decoder,
        audio_decoder=audio_decoder,
        evaluation_models=tuple(models),
        report_format=report_format,
        report_path=report_path,
    )


def load_config(path: str | None = None) -> PipelineConfig:
    """Load config from ``path``, or from $HOLOCAP_CONFIG when absent."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if not path:
        raise ConfigError(f"no config path given and {ENV_CONFIG} is unset")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
    return config_from_dict(obj, base_dir=p.parent)
