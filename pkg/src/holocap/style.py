"""Video-level style as dominant color names.

Per frame, pixels are clustered into two RGB centroids (Lloyd's algorithm,
k-means++ init); each centroid is mapped to its nearest entry in the 147-name
extended web color keyword table; the two most frequent names across all
frames become the video's style.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from ._hash import hash64, mix_seed
from .ingest import FrameSample

COLOR_TABLE_ASSET = "css3_colors.csv"
COLOR_TABLE_SHA256 = "1f906d701d2da112375ad6571a688b5b7e63658f04a4a6690cd766a349229927"

# Clustering more pixels than this per frame buys nothing for a 2-centroid
# palette; selection is a deterministic stride so runs stay reproducible.
MAX_PIXELS_PER_FRAME = 16_384

DEFAULT_MAX_ITER = 50
DEFAULT_TOL = 0.5  # RGB units of centroid movement


@dataclass(frozen=True)
class ColorTable:
    """Named RGB lookup table (147 extended web color keywords)."""

    names: tuple[str, ...]
    rgb: np.ndarray  # (147, 3) float64

    def __len__(self) -> int:
        return len(self.names)

    def rgb_of(self, name: str) -> tuple[int, int, int]:
        idx = self.names.index(name)
        r, g, b = self.rgb[idx]
        return int(r), int(g), int(b)


def load_color_table() -> ColorTable:
    """Load the packaged color table, verifying its checksum."""
    data = resources.files("holocap").joinpath("data", COLOR_TABLE_ASSET).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != COLOR_TABLE_SHA256:
        raise ValueError(f"color table asset checksum mismatch: {digest}")
    names: list[str] = []
    values: list[tuple[int, int, int]] = []
    for line in data.decode("utf-8").splitlines():
        name, hexcode = line.split(",")
        names.append(name)
        values.append((int(hexcode[1:3], 16), int(hexcode[3:5], 16), int(hexcode[5:7], 16)))
    if len(names) != 147 or len(set(names)) != 147:
        raise ValueError(f"color table must hold 147 unique names, got {len(names)}")
    return ColorTable(names=tuple(names), rgb=np.asarray(values, dtype=np.float64))


_TABLE: ColorTable | None = None


def default_color_table() -> ColorTable:
    global _TABLE
    if _TABLE is None:
        _TABLE = load_color_table()
    return _TABLE


def nearest_color_name(rgb: Sequence[float], table: ColorTable | None = None) -> str:
    """Name of the table entry nearest to ``rgb`` (squared Euclidean).

    Distance ties are broken by the lexicographically smallest name, so
    aliases like aqua/cyan resolve deterministically.
    """
    table = table or default_color_table()
    r, g, b = (float(c) for c in rgb)
    if not (0 <= r <= 255 and 0 <= g <= 255 and 0 <= b <= 255):
        raise ValueError(f"RGB components must lie in 0-255, got {rgb!r}")
    d2 = ((table.rgb - np.array([r, g, b])) ** 2).sum(axis=1)
    best = np.min(d2)
    candidates = [table.names[i] for i in np.flatnonzero(d2 == best)]
    return min(candidates)


@dataclass(frozen=True)
class KMeansResult:
    """Lloyd run outcome: final centroids plus the per-iteration inertia trace."""

    centroids: np.ndarray  # (k, 3) float64
    inertia_history: tuple[float, ...]
    n_iter: int


def kmeans_plus_plus_init(pixels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """k-means++ seeding over an (n, 3) pixel array, driven by ``seed``."""
    rng = np.random.default_rng(seed)
    n = len(pixels)
    centroids = np.empty((k, 3), dtype=np.float64)
    centroids[0] = pixels[rng.integers(n)]
    for j in range(1, k):
        d2 = ((pixels[:, None, :] - centroids[None, :j, :]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        if total <= 0.0:
            # All remaining mass sits on already-chosen points; duplicate.
            centroids[j] = centroids[0]
            continue
        centroids[j] = pixels[rng.choice(n, p=d2 / total)]
    return centroids


def cluster_pixels(
    pixels: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> KMeansResult:
    """Run Lloyd's algorithm from a k-means++ init.

    Iterations stop once the largest centroid movement drops below ``tol``
    or after ``max_iter`` rounds. A cluster that loses all its points keeps
    its previous centroid, which also covers k > distinct-pixel inputs.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[1] != 3:
        raise ValueError(f"expected (n, 3) pixel array, got shape {pixels.shape}")
    if len(pixels) == 0:
        raise ValueError("cannot cluster an empty pixel set")
    if k < 1:
        raise ValueError("k must be >= 1")

    centroids = kmeans_plus_plus_init(pixels, k, seed)
    inertia_history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = ((pixels[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assignment = d2.argmin(axis=1)
        inertia_history.append(float(d2[np.arange(len(pixels)), assignment].sum()))
        new_centroids = centroids.copy()
        for j in range(k):
            members = pixels[assignment == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
        movement = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if movement < tol:
            break
    return KMeansResult(centroids=centroids, inertia_history=tuple(inertia_history), n_iter=n_iter)


def _luminance(rgb: np.ndarray) -> float:
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]


def _subsample(pixels: np.ndarray) -> np.ndarray:
    if len(pixels) <= MAX_PIXELS_PER_FRAME:
        return pixels
    stride = math.ceil(len(pixels) / MAX_PIXELS_PER_FRAME)
    return pixels[::stride]


def frame_pixels(frame: FrameSample) -> np.ndarray:
    """Frame pixels as an (n, 3) float array, stride-subsampled."""
    arr = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(-1, 3).astype(np.float64)
    return _subsample(arr)


def kmeans_colors(
    frame: FrameSample,
    k: int = 2,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> list[tuple[float, float, float]]:
    """Dominant RGB centroids of one frame, sorted by luminance descending."""
    result = cluster_pixels(frame_pixels(frame), k=k, seed=seed, max_iter=max_iter, tol=tol)
    order = sorted(
        range(k),
        key=lambda j: (_luminance(result.centroids[j]),) + tuple(result.centroids[j]),
        reverse=True,
    )
    return [tuple(result.centroids[j]) for j in order]


@dataclass(frozen=True)
class StyleAnnotation:
    """Dominant color names for one video."""

    top_colors: tuple[str, ...]
    histogram: dict[str, int] = field(default_factory=dict)
    per_frame: tuple[tuple[int, tuple[float, float, float], tuple[float, float, float]], ...] = ()


def video_style(
    frames: Iterable[FrameSample],
    seed: int = 0,
    table: ColorTable | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> StyleAnnotation:
    """Name both per-frame centroids and keep the two most frequent names.

    The per-frame clustering seed mixes the base seed with the frame's pixel
    content, so the histogram is invariant under frame reordering. Count ties
    are broken by lexicographic name order.
    """
    table = table or default_color_table()
    histogram: dict[str, int] = {}
    per_frame = []
    n_frames = 0
    for frame in frames:
        n_frames += 1
        frame_seed = mix_seed(seed, hash64(frame.pixels))
        c1, c2 = kmeans_colors(frame, k=2, seed=frame_seed, max_iter=max_iter, tol=tol)
        per_frame.append((frame.index, c1, c2))
        for centroid in (c1, c2):
            name = nearest_color_name(centroid, table)
            histogram[name] = histogram.get(name, 0) + 1
    if n_frames == 0:
        raise ValueError("video_style requires at least one frame")

    ranked = sorted(histogram.items(), key=lambda item: (-item[1], item[0]))
    top = tuple(name for name, _ in ranked[:2])
    return StyleAnnotation(
        top_colors=top, histogram=dict(sorted(histogram.items())), per_frame=tuple(per_frame)
    )
