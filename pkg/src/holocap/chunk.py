"""The canonical information-chunk text carrying all four facets.

Grammar (version ``chunk-v1``)::

    [visual: "(frame01: <c1>, frame02: <c2>, ...)"] [dialogue: "<text>"] [tone: "<label>"] [style: "<n1>, <n2>"]

Inside every quoted segment, backslash, double quote, and ``]`` are
backslash-escaped. Frame labels are 1-based, zero-padded to width 2 (width 3
and beyond unpadded). Absent dialogue renders as an empty quoted string so
the grammar stays fixed-arity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .experts import (
    DialogueAnnotation,
    VisualAnnotation,
    visual_annotation_from_captions,
)
from .style import StyleAnnotation
from .tone import ToneAnnotation

CHUNK_VERSION = "chunk-v1"

DEFAULT_MAX_VISUAL_ENTRIES = 15

# A caption containing the entry separator would make rendering ambiguous.
_SEPARATOR_IN_CAPTION = re.compile(r", frame\d{2,}: ")
_ENTRY_SPLIT = re.compile(r", (?=frame\d{2,}: )")
_ENTRY = re.compile(r"^(frame\d{2,}): (.*)$", re.S)


class ChunkParseError(ValueError):
    """Grammar violation, with the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("]", "\\]")


def render_chunk_text(
    visual_entries: Sequence[tuple[str, str]],
    dialogue_text: str,
    tone_label: str,
    style_names: Sequence[str],
) -> str:
    """Render the four facet projections into chunk-v1 text."""
    for _, caption in visual_entries:
        if _SEPARATOR_IN_CAPTION.search(caption):
            raise ValueError(f"caption collides with the entry separator: {caption!r}")
    for name in style_names:
        if ", " in name:
            raise ValueError(f"style name may not contain ', ': {name!r}")
    visual_body = "(" + ", ".join(f"{label}: {caption}" for label, caption in visual_entries) + ")"
    return (
        f'[visual: "{_escape(visual_body)}"]'
        f' [dialogue: "{_escape(dialogue_text)}"]'
        f' [tone: "{_escape(tone_label)}"]'
        f' [style: "{_escape(", ".join(style_names))}"]'
    )


@dataclass(frozen=True)
class InformationChunk:
    """The four-facet annotation bundle with its canonical rendering."""

    visual: VisualAnnotation
    dialogue: DialogueAnnotation
    tone: ToneAnnotation
    style: StyleAnnotation
    rendered: str


def compose_chunk(
    visual: VisualAnnotation,
    dialogue: DialogueAnnotation,
    tone: ToneAnnotation,
    style: StyleAnnotation,
) -> InformationChunk:
    """Bundle four facets and render their canonical chunk text."""
    rendered = render_chunk_text(
        visual.entries, dialogue.transcript_en, tone.tone, style.top_colors
    )
    return InformationChunk(visual=visual, dialogue=dialogue, tone=tone, style=style, rendered=rendered)


@dataclass(frozen=True)
class ParsedChunk:
    """Facets recovered from chunk text.

    Only what the text carries: visual entries, the transcript, the tone
    label, and the style names. Counts, per-frame centroids, and language
    metadata are not serialized in the grammar.
    """

    visual_entries: tuple[tuple[str, str], ...]
    dialogue_text: str
    tone_label: str
    style_names: tuple[str, ...]

    @property
    def rendered(self) -> str:
        return render_chunk_text(self.visual_entries, self.dialogue_text, self.tone_label, self.style_names)

    def dialogue(self) -> DialogueAnnotation:
        if not self.dialogue_text:
            return DialogueAnnotation(
                transcript_en="", detected_language="", was_translated=False, present=False
            )
        return DialogueAnnotation(
            transcript_en=self.dialogue_text, detected_language="", was_translated=False, present=True
        )


def _expect(text: str, pos: int, literal: str) -> int:
    if not text.startswith(literal, pos):
        raise ChunkParseError(f"expected {literal!r}", pos)
    return pos + len(literal)


def _scan_quoted(text: str, pos: int) -> tuple[str, int]:
    """Read an escaped quoted segment starting right after its opening quote."""
    out: list[str] = []
    i = pos
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise ChunkParseError("dangling escape", i)
            nxt = text[i + 1]
            if nxt not in ('\\', '"', ']'):
                raise ChunkParseError(f"unknown escape \\{nxt}", i)
            out.append(nxt)
            i += 2
        elif ch == '"':
            return "".join(out), i + 1
        else:
            out.append(ch)
            i += 1
    raise ChunkParseError("unterminated quoted segment", pos)


def _parse_visual_body(body: str, offset: int) -> tuple[tuple[str, str], ...]:
    if not body.startswith("(") or not body.endswith(")"):
        raise ChunkParseError("visual segment must be parenthesized", offset)
    inner = body[1:-1]
    entries: list[tuple[str, str]] = []
    for part in _ENTRY_SPLIT.split(inner):
        m = _ENTRY.match(part)
        if not m:
            raise ChunkParseError(f"malformed visual entry {part[:40]!r}", offset)
        entries.append((m.group(1), m.group(2)))
    return tuple(entries)


def parse_chunk(text: str) -> ParsedChunk:
    """Parse chunk-v1 text back into its facet projections."""
    pos = _expect(text, 0, '[visual: "')
    visual_offset = pos
    visual_body, pos = _scan_quoted(text, pos)
    pos = _expect(text, pos, '] [dialogue: "')
    dialogue_text, pos = _scan_quoted(text, pos)
    pos = _expect(text, pos, '] [tone: "')
    tone_label, pos = _scan_quoted(text, pos)
    pos = _expect(text, pos, '] [style: "')
    style_body, pos = _scan_quoted(text, pos)
    pos = _expect(text, pos, "]")
    if pos != len(text):
        raise ChunkParseError("trailing content after style block", pos)

    entries = _parse_visual_body(visual_body, visual_offset)
    style_names = tuple(style_body.split(", ")) if style_body else ()
    return ParsedChunk(
        visual_entries=entries,
        dialogue_text=dialogue_text,
        tone_label=tone_label,
        style_names=style_names,
    )


def reduce_visual(
    entries: VisualAnnotation | Sequence[str | tuple[str, str]],
    max_entries: int = DEFAULT_MAX_VISUAL_ENTRIES,
) -> VisualAnnotation:
    """Collapse consecutive duplicate captions, then subsample evenly.

    Output keeps at most ``max_entries`` captions in their original order,
    relabeled frame01..frameNN. Subsampling always keeps the first and last
    surviving captions.
    """
    if max_entries < 1:
        raise ValueError("max_entries must be >= 1")
    if isinstance(entries, VisualAnnotation):
        captions = list(entries.captions())
    else:
        captions = [e[1] if isinstance(e, tuple) else e for e in entries]

    collapsed: list[str] = []
    for caption in captions:
        if not collapsed or collapsed[-1] != caption:
            collapsed.append(caption)

    n = len(collapsed)
    if n > max_entries:
        if max_entries == 1:
            picked = [collapsed[0]]
        else:
            step = (n - 1) / (max_entries - 1)
            picked = [collapsed[int(j * step + 0.5)] for j in range(max_entries)]
    else:
        picked = collapsed
    return visual_annotation_from_captions(picked)
