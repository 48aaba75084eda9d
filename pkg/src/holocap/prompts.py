"""Prompt strategies that frame an information chunk for the composing model.

Four instruction framings ship as UTF-8 data assets, checksummed so a
corrupted install fails loudly. The rendered prompt is the strategy text,
an optional fill-in block (template strategy only), then the chunk under a
fixed ``INFORMATION CHUNK:`` header.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from ._hash import hash64
from .chunk import InformationChunk


class PromptStrategy(Enum):
    BASIC = "basic"
    ROLE_PLAY = "role_play"
    TEMPLATE = "template"
    RULE = "rule"


DEFAULT_STRATEGY = PromptStrategy.RULE

CHUNK_HEADER = "INFORMATION CHUNK:"

# sha256 of each strategy asset; guards against silent edits or bad installs.
_ASSET_SHA256 = {
    PromptStrategy.BASIC: "40bc186e2c06b02d574f44e12eb83b23fdd048d40ed83ddd14f655492a7e511d",
    PromptStrategy.ROLE_PLAY: "47643337226cdd0c0194581d1be3bb46022dab065fc0063af2af60fed90f2e55",
    PromptStrategy.TEMPLATE: "358de87175ae7edf3fecd1835608ec7f499213faebe836c527d78a50e49e8c8f",
    PromptStrategy.RULE: "83e2e2bea40db2a5b3504914adb903666354eb83d233f8ac828f8dbc732ce98e",
}


@lru_cache(maxsize=None)
def strategy_text(strategy: PromptStrategy) -> str:
    """Load a strategy's instruction text from package data."""
    name = f"prompt_{strategy.value}.txt"
    raw = resources.files("holocap.data").joinpath(name).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    expected = _ASSET_SHA256[strategy]
    if digest != expected:
        raise RuntimeError(f"prompt asset {name} checksum mismatch: {digest}")
    return raw.decode("utf-8")


@dataclass(frozen=True)
class RenderedPrompt:
    strategy: PromptStrategy
    text: str
    chunk_hash: int


def _template_fill_ins(chunk: InformationChunk) -> str:
    """Resolve the template slots against the chunk's visual entries.

    The slot names are qualitative ("first few frames"); we fix them as the
    first two, the middle one, and the last two captions.
    """
    captions = list(chunk.visual.captions())
    n = len(captions)
    first = captions[:2]
    middle = [captions[n // 2]]
    last = captions[-2:]
    lines = [
        "Fill-in values:",
        "- first few frames in visual annotation: " + "; ".join(first),
        "- middle frames in visual annotation: " + "; ".join(middle),
        "- last few frames in visual annotation: " + "; ".join(last),
    ]
    return "\n".join(lines)


def render_prompt(strategy: PromptStrategy, chunk: InformationChunk) -> RenderedPrompt:
    """Render the strategy instruction around the chunk.

    Args:
      strategy: one of the four instruction framings.
      chunk: composed information chunk to append.

    Returns:
      RenderedPrompt whose text contains the chunk's rendered form exactly
      once, after the instruction and a fixed header line.
    """
    if not isinstance(strategy, PromptStrategy):
        raise ValueError(f"unknown strategy: {strategy!r}")
    parts = [strategy_text(strategy)]
    if strategy is PromptStrategy.TEMPLATE:
        parts.append(_template_fill_ins(chunk))
    parts.append(f"{CHUNK_HEADER}\n{chunk.rendered}")
    text = "\n\n".join(parts)
    if text.count(chunk.rendered) != 1:
        raise RuntimeError("rendered prompt must contain the chunk exactly once")
    return RenderedPrompt(
        strategy=strategy,
        text=text,
        chunk_hash=hash64(chunk.rendered.encode("utf-8")),
    )
