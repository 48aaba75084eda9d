"""Text-video retrieval metrics: r@k, the 2x2 benchmark grid, and reports.

A similarity matrix holds one row per text query and one column per video;
ground truth is the aligned diagonal. Recall at k is the fraction of
queries whose true video ranks in the top k by descending score, ties
going to the smaller column index.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAIR_SETTINGS = ("original", "improved")

# (training_pairs, query_pairs) in fixed report order.
CELL_ORDER = (
    ("original", "original"),
    ("original", "improved"),
    ("improved", "original"),
    ("improved", "improved"),
)

REPORT_KS = (1, 5, 10)

SIMMAT_TEXT_HEADER = "simmat-v1"
SIMMAT_BINARY_MAGIC = b"SIMMAT01"


class MetricsError(ValueError):
    """Malformed matrix, grid, or matrix file."""


@dataclass(frozen=True)
class SimilarityMatrix:
    """N x N query-video scores with aligned id lists."""

    scores: np.ndarray
    query_ids: tuple[str, ...]
    video_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
            raise MetricsError(f"scores must be square, got shape {scores.shape}")
        n = scores.shape[0]
        if len(self.query_ids) != n or len(self.video_ids) != n:
            raise MetricsError("id lists must match matrix size")
        if len(set(self.query_ids)) != n or len(set(self.video_ids)) != n:
            raise MetricsError("ids must be unique")
        if not np.isfinite(scores).all():
            raise MetricsError("scores must be finite")

    @property
    def n(self) -> int:
        return self.scores.shape[0]


def recall_at_k(m: SimilarityMatrix, k: int) -> float:
    """Fraction of queries whose ground-truth video ranks in the top k.

    Rank is 1-based by descending score; equal scores rank by smaller
    column index, so the result is deterministic on any input.
    """
    n = m.n
    if not 1 <= k <= n:
        raise MetricsError(f"k must be in [1, {n}], got {k}")
    scores = m.scores
    truth = np.diag(scores)
    cols = np.arange(n)
    better = (scores > truth[:, None]).sum(axis=1)
    tied_before = ((scores == truth[:, None]) & (cols[None, :] < cols[:, None])).sum(axis=1)
    ranks = 1 + better + tied_before
    return float((ranks <= k).mean())


@dataclass(frozen=True)
class MetricsCell:
    """r@k triple for one (training pairs, query pairs) benchmark cell."""

    r1: float
    r5: float
    r10: float
    training_pairs: str
    query_pairs: str

    def __post_init__(self) -> None:
        for v in (self.r1, self.r5, self.r10):
            if not 0.0 <= v <= 1.0:
                raise MetricsError(f"metric out of range: {v}")
        if not self.r1 <= self.r5 <= self.r10:
            raise MetricsError("recall must be non-decreasing in k")
        for setting in (self.training_pairs, self.query_pairs):
            if setting not in PAIR_SETTINGS:
                raise MetricsError(f"unknown pair setting {setting!r}")

    @property
    def coords(self) -> tuple[str, str]:
        return (self.training_pairs, self.query_pairs)

    def metric(self, k: int) -> float:
        return {1: self.r1, 5: self.r5, 10: self.r10}[k]


@dataclass(frozen=True)
class BenchmarkGrid:
    """All four benchmark cells for one retrieval model."""

    model_name: str
    cells: tuple[MetricsCell, MetricsCell, MetricsCell, MetricsCell]

    def __post_init__(self) -> None:
        coords = [cell.coords for cell in self.cells]
        if sorted(coords) != sorted(CELL_ORDER):
            raise MetricsError(f"grid needs the four distinct cells, got {coords}")

    def cell(self, training_pairs: str, query_pairs: str) -> MetricsCell:
        for c in self.cells:
            if c.coords == (training_pairs, query_pairs):
                return c
        raise MetricsError(f"no cell ({training_pairs}, {query_pairs})")


def build_grid(
    model_name: str,
    cells: Iterable[tuple[tuple[str, str], SimilarityMatrix]],
) -> BenchmarkGrid:
    """Compute r@{1,5,10} for the four coordinate-tagged matrices."""
    seen: dict[tuple[str, str], MetricsCell] = {}
    for coords, matrix in cells:
        training, query = coords
        if coords in seen:
            raise MetricsError(f"duplicate cell {coords}")
        seen[coords] = MetricsCell(
            r1=recall_at_k(matrix, 1),
            r5=recall_at_k(matrix, 5),
            r10=recall_at_k(matrix, 10),
            training_pairs=training,
            query_pairs=query,
        )
    missing = [c for c in CELL_ORDER if c not in seen]
    if missing:
        raise MetricsError(f"missing cells: {missing}")
    ordered = tuple(seen[c] for c in CELL_ORDER)
    return BenchmarkGrid(model_name=model_name, cells=ordered)


def average_difference(grid: BenchmarkGrid) -> float:
    """Mean signed percentage-point gain of improved-trained over original.

    Averages (improved-trained minus original-trained) at matching query
    settings for k in {1, 5, 10}: six differences in total.
    """
    diffs = []
    for query_pairs in PAIR_SETTINGS:
        improved = grid.cell("improved", query_pairs)
        original = grid.cell("original", query_pairs)
        for k in REPORT_KS:
            diffs.append(100.0 * (improved.metric(k) - original.metric(k)))
    return sum(diffs) / len(diffs)


def _pct(v: float) -> str:
    return f"{100.0 * v:.1f}"


def render_report(grids: Sequence[BenchmarkGrid], format: str = "text_table") -> str:
    """Per-model benchmark tables plus average-difference summary lines.

    Models are ordered by name; output is byte-deterministic for equal
    inputs. ``format`` is ``text_table`` or ``csv``.
    """
    if not grids:
        raise MetricsError("report needs at least one grid")
    ordered = sorted(grids, key=lambda g: g.model_name)
    if format == "text_table":
        return _render_text(ordered)
    if format == "csv":
        return _render_csv(ordered)
    raise MetricsError(f"unknown report format {format!r}")


def _render_text(grids: Sequence[BenchmarkGrid]) -> str:
    blocks = []
    for grid in grids:
        lines = [f"model: {grid.model_name}"]
        lines.append(f"{'training':<10} {'queries':<10} {'r@1':>6} {'r@5':>6} {'r@10':>6}")
        for coords in CELL_ORDER:
            cell = grid.cell(*coords)
            lines.append(
                f"{cell.training_pairs:<10} {cell.query_pairs:<10}"
                f" {_pct(cell.r1):>6} {_pct(cell.r5):>6} {_pct(cell.r10):>6}"
            )
        lines.append(f"average_difference: {average_difference(grid):+.2f}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _render_csv(grids: Sequence[BenchmarkGrid]) -> str:
    lines = ["model,training,queries,r@1,r@5,r@10"]
    for grid in grids:
        for coords in CELL_ORDER:
            cell = grid.cell(*coords)
            lines.append(
                f"{grid.model_name},{cell.training_pairs},{cell.query_pairs},"
                f"{_pct(cell.r1)},{_pct(cell.r5)},{_pct(cell.r10)}"
            )
        lines.append(f"{grid.model_name},average_difference,,{average_difference(grid):+.2f},,")
    return "\n".join(lines) + "\n"


def save_similarity_text(m: SimilarityMatrix, path: str | Path) -> None:
    """Text form: header, N id-pair lines, N comma-separated score rows."""
    lines = [f"{SIMMAT_TEXT_HEADER},{m.n}"]
    for qid, vid in zip(m.query_ids, m.video_ids):
        _check_id(qid)
        _check_id(vid)
        lines.append(f"{qid},{vid}")
    for row in m.scores:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_similarity_binary(m: SimilarityMatrix, path: str | Path) -> None:
    """Binary form: magic, uint32 N, id pairs, float32 row-major scores."""
    out = [SIMMAT_BINARY_MAGIC, struct.pack("<I", m.n)]
    for qid, vid in zip(m.query_ids, m.video_ids):
        for token in (qid, vid):
            raw = token.encode("utf-8")
            out.append(struct.pack("<I", len(raw)))
            out.append(raw)
    out.append(np.asarray(m.scores, dtype="<f4").tobytes(order="C"))
    Path(path).write_bytes(b"".join(out))


def _check_id(token: str) -> None:
    if "," in token or "\n" in token or not token:
        raise MetricsError(f"id not representable in the text format: {token!r}")


def load_similarity(path: str | Path) -> SimilarityMatrix:
    """Load either matrix file form, detected by the binary magic."""
    raw = Path(path).read_bytes()
    if raw.startswith(SIMMAT_BINARY_MAGIC):
        return _load_binary(raw, path)
    return _load_text(raw.decode("utf-8"), path)


def _load_text(text: str, path: str | Path) -> SimilarityMatrix:
    lines = text.splitlines()
    if not lines:
        raise MetricsError(f"{path}: empty matrix file")
    header = lines[0].split(",")
    if len(header) != 2 or header[0] != SIMMAT_TEXT_HEADER:
        raise MetricsError(f"{path}: bad header {lines[0]!r}")
    try:
        n = int(header[1])
    except ValueError as exc:
        raise MetricsError(f"{path}: bad size in header") from exc
    if len(lines) != 1 + 2 * n:
        raise MetricsError(f"{path}: expected {1 + 2 * n} lines, got {len(lines)}")
    query_ids: list[str] = []
    video_ids: list[str] = []
    for line in lines[1 : 1 + n]:
        parts = line.split(",")
        if len(parts) != 2:
            raise MetricsError(f"{path}: bad id pair line {line!r}")
        query_ids.append(parts[0])
        video_ids.append(parts[1])
    rows = []
    for line in lines[1 + n :]:
        row = [float(v) for v in line.split(",")]
        if len(row) != n:
            raise MetricsError(f"{path}: row of length {len(row)}, expected {n}")
        rows.append(row)
    return SimilarityMatrix(
        scores=np.array(rows, dtype=np.float64),
        query_ids=tuple(query_ids),
        video_ids=tuple(video_ids),
    )


def _load_binary(raw: bytes, path: str | Path) -> SimilarityMatrix:
    off = len(SIMMAT_BINARY_MAGIC)
    if len(raw) < off + 4:
        raise MetricsError(f"{path}: truncated binary matrix")
    (n,) = struct.unpack_from("<I", raw, off)
    off += 4
    ids: list[str] = []
    for _ in range(2 * n):
        if len(raw) < off + 4:
            raise MetricsError(f"{path}: truncated id block")
        (length,) = struct.unpack_from("<I", raw, off)
        off += 4
        if len(raw) < off + length:
            raise MetricsError(f"{path}: truncated id block")
        ids.append(raw[off : off + length].decode("utf-8"))
        off += length
    need = 4 * n * n
    if len(raw) - off != need:
        raise MetricsError(f"{path}: expected {need} score bytes, got {len(raw) - off}")
    scores = np.frombuffer(raw, dtype="<f4", count=n * n, offset=off).reshape(n, n)
    return SimilarityMatrix(
        scores=scores.astype(np.float64),
        query_ids=tuple(ids[0::2]),
        video_ids=tuple(ids[1::2]),
    )
