"""Timed frame sampling and audio extraction for one clip.

Two ingestion modes:

* directory mode: ``media_path`` points at a directory of pre-extracted
  frames named ``frame_%05d.png`` (0-based) with a ``frames.json`` sidecar
  ``{"duration_s", "rate_fps", "width", "height"}`` and an optional
  ``audio.wav``; the whole test suite runs this way, no media tooling needed.
* decoder mode: ``media_path`` is a media file handed to an external decoder
  command template, which must populate a frame directory (or a WAV file for
  audio) and exit 0.
"""

from __future__ import annotations

import json
import logging
import math
import shlex
import subprocess
import tempfile
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .manifest import VideoAsset

logger = logging.getLogger(__name__)

SIDECAR_NAME = "frames.json"
AUDIO_NAME = "audio.wav"
FRAME_PATTERN = "frame_{:05d}.png"
DEFAULT_AUDIO_RATE_HZ = 16_000

# One-frame metadata tolerances.
TIMESTAMP_TOL_S = 0.001
AUDIO_DURATION_TOL_S = 0.010


class IngestError(Exception):
    """Base failure for media ingestion."""


class DecoderError(IngestError):
    """External decoder failed or produced unusable output."""


class FrameDirectoryError(IngestError):
    """Frame directory missing, misnamed, or inconsistent with its sidecar."""


class AudioDecodeError(IngestError):
    """Audio stream exists but cannot be decoded (distinct from absent)."""


@dataclass(frozen=True)
class FrameSample:
    """One decoded RGB frame."""

    video_id: str
    index: int
    timestamp_s: float
    pixels: bytes  # packed RGB8, len == width * height * 3
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != {self.width}x{self.height}x3"
            )


@dataclass(frozen=True)
class AudioTrack:
    """Mono PCM audio for one clip."""

    video_id: str
    samples: np.ndarray  # int16
    sample_rate_hz: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def pcm16_bytes(self) -> bytes:
        return self.samples.astype("<i2").tobytes()


def _read_sidecar(directory: Path) -> dict:
    sidecar = directory / SIDECAR_NAME
    if not sidecar.is_file():
        raise FrameDirectoryError(f"{directory}: missing {SIDECAR_NAME} sidecar")
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FrameDirectoryError(f"{sidecar}: invalid JSON: {exc}") from exc
    for key in ("duration_s", "rate_fps", "width", "height"):
        if key not in meta:
            raise FrameDirectoryError(f"{sidecar}: missing {key!r}")
    return meta


def _frames_from_directory(asset: VideoAsset, directory: Path, rate_fps: float) -> list[FrameSample]:
    meta = _read_sidecar(directory)
    available_rate = float(meta["rate_fps"])
    if rate_fps > available_rate + 1e-9:
        raise FrameDirectoryError(
            f"{directory}: requested {rate_fps} fps exceeds extracted rate {available_rate} fps"
        )
    ratio = available_rate / rate_fps
    stride = round(ratio)
    if abs(ratio - stride) > 1e-9:
        raise FrameDirectoryError(
            f"{directory}: rate {rate_fps} fps does not evenly divide extracted rate {available_rate} fps"
        )

    n_frames = math.floor(asset.duration_s * rate_fps)
    if n_frames == 0:
        raise FrameDirectoryError(f"{directory}: zero frames at {rate_fps} fps for {asset.duration_s}s clip")

    samples = []
    for k in range(n_frames):
        frame_path = directory / FRAME_PATTERN.format(k * stride)
        if not frame_path.is_file():
            raise FrameDirectoryError(f"{directory}: expected frame file {frame_path.name}")
        with Image.open(frame_path) as img:
            rgb = img.convert("RGB")
            width, height = rgb.size
            pixels = rgb.tobytes()
        if (width, height) != (int(meta["width"]), int(meta["height"])):
            raise FrameDirectoryError(
                f"{frame_path.name}: size {width}x{height} does not match sidecar "
                f"{meta['width']}x{meta['height']}"
            )
        samples.append(
            FrameSample(
                video_id=asset.video_id,
                index=k,
                timestamp_s=k / rate_fps,
                pixels=pixels,
                width=width,
                height=height,
            )
        )
    return samples


def _run_template(template: str, substitutions: dict[str, str]) -> None:
    argv = []
    for token in shlex.split(template):
        for key, value in substitutions.items():
            token = token.replace("{" + key + "}", value)
        argv.append(token)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise DecoderError(f"decoder command failed to start: {exc}") from exc
    if proc.returncode != 0:
        raise DecoderError(
            f"decoder exited {proc.returncode}: {proc.stderr.strip()[:500]}"
        )


def sample_frames(
    asset: VideoAsset,
    rate_fps: float,
    decoder_template: str | None = None,
    workdir: str | Path | None = None,
) -> list[FrameSample]:
    """Evenly spaced frames at ``rate_fps`` starting from t = 0.

    Returns exactly ``floor(duration_s * rate_fps)`` frames with a gapless
    0-based index and ``timestamp_s = index / rate_fps``.
    """
    if rate_fps <= 0:
        raise ValueError("rate_fps must be > 0")
    media = Path(asset.media_path)
    if media.is_dir():
        return _frames_from_directory(asset, media, rate_fps)
    if not media.exists():
        raise DecoderError(f"{media}: media not readable")
    if decoder_template is None:
        raise DecoderError(f"{media}: decoder mode requires a frame decoder command template")

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        outdir = Path(tmp) / "frames"
        outdir.mkdir()
        _run_template(decoder_template, {"input": str(media), "rate": f"{rate_fps:g}", "outdir": str(outdir)})
        produced = sorted(outdir.glob("frame_*.png"))
        if not produced:
            raise DecoderError(f"{media}: decoder produced zero frames")
        with Image.open(produced[0]) as first:
            width, height = first.size
        sidecar = {
            "duration_s": asset.duration_s,
            "rate_fps": rate_fps,
            "width": width,
            "height": height,
        }
        (outdir / SIDECAR_NAME).write_text(json.dumps(sidecar), encoding="utf-8")
        return _frames_from_directory(asset, outdir, rate_fps)


def extract_audio(
    asset: VideoAsset,
    sample_rate_hz: int = DEFAULT_AUDIO_RATE_HZ,
    decoder_template: str | None = None,
    workdir: str | Path | None = None,
) -> AudioTrack | None:
    """Mono PCM track, or None when the clip has no audio stream.

    The manifest ``has_audio`` flag wins: a flagged-off asset returns absent
    without touching the media. Decode failures on a stream that should exist
    raise :class:`AudioDecodeError` instead.
    """
    if not asset.has_audio:
        return None
    media = Path(asset.media_path)
    if media.is_dir():
        wav_path = media / AUDIO_NAME
        if not wav_path.is_file():
            raise AudioDecodeError(f"{media}: has_audio is set but {AUDIO_NAME} is missing")
        return _read_wav(asset.video_id, wav_path, sample_rate_hz)
    if not media.exists():
        raise AudioDecodeError(f"{media}: media not readable")
    if decoder_template is None:
        raise AudioDecodeError(f"{media}: decoder mode requires an audio decoder command template")

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        wav_path = Path(tmp) / "audio.wav"
        _run_template(
            decoder_template,
            {"input": str(media), "rate": str(sample_rate_hz), "outwav": str(wav_path)},
        )
        if not wav_path.is_file():
            raise AudioDecodeError(f"{media}: audio decoder produced no output")
        return _read_wav(asset.video_id, wav_path, sample_rate_hz)


def _read_wav(video_id: str, path: Path, expected_rate_hz: int) -> AudioTrack:
    try:
        with wave.open(str(path), "rb") as wav:
            n_channels = wav.getnchannels()
            sample_width = wav.getsampwidth()
            rate = wav.getframerate()
            raw = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"{path}: undecodable WAV: {exc}") from exc
    if sample_width != 2:
        raise AudioDecodeError(f"{path}: expected 16-bit PCM, got {sample_width * 8}-bit")
    if rate != expected_rate_hz:
        raise AudioDecodeError(f"{path}: sample rate {rate} Hz != configured {expected_rate_hz} Hz")
    samples = np.frombuffer(raw, dtype="<i2")
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1).astype(np.int16)
    return AudioTrack(video_id=video_id, samples=samples, sample_rate_hz=rate)
