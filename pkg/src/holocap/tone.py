"""Video-level tone from per-frame emotion labels.

One label is collected per sampled frame (2 fps upstream); the video tone is
the modal emotion after dropping frames where no face was found.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

EMOTIONS = ("neutral", "disgust", "happy", "anger", "contempt", "sad", "fear", "surprise")
NO_FACE = "no_face"
EMOTION_VOCABULARY = EMOTIONS + (NO_FACE,)

# Tie-break order: expressive emotions win over neutral so count ties do not
# collapse to blandness.
TIE_PRIORITY = ("happy", "surprise", "sad", "anger", "fear", "disgust", "contempt", "neutral")


@dataclass(frozen=True)
class ToneAnnotation:
    """Aggregated emotional tone for one video."""

    tone: str
    counts: dict[str, int] = field(default_factory=dict)
    frames_considered: int = 0


def aggregate_tone(labels: Iterable[str]) -> ToneAnnotation:
    """Pick the most frequent emotion across frame labels.

    ``no_face`` labels are excluded from the count. Ties are broken by
    :data:`TIE_PRIORITY`. An empty or all-``no_face`` input yields a neutral
    tone with ``frames_considered == 0``.
    """
    counts: Counter[str] = Counter()
    for label in labels:
        if label not in EMOTION_VOCABULARY:
            raise ValueError(f"unknown emotion label: {label!r}")
        if label != NO_FACE:
            counts[label] += 1

    if not counts:
        return ToneAnnotation(tone="neutral", counts={}, frames_considered=0)

    best = max(counts.values())
    tone = next(e for e in TIE_PRIORITY if counts.get(e) == best)
    ordered = {e: counts[e] for e in EMOTIONS if e in counts}
    return ToneAnnotation(tone=tone, counts=ordered, frames_considered=sum(counts.values()))
