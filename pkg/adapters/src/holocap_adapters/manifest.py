"""Adapter identity: what kind of expert a process serves, with which model."""

from __future__ import annotations

from dataclasses import dataclass

EXPERT_KINDS = ("caption", "transcribe", "emotion", "chat")

# Wire-contract copy of the consumer's emotion vocabulary. The adapters
# deliberately do not import the consumer package; this tuple is part of
# the /v1/emotion response schema.
EMOTION_LABELS = (
    "neutral",
    "disgust",
    "happy",
    "anger",
    "contempt",
    "sad",
    "fear",
    "surprise",
)
NO_FACE = "no_face"
EMOTION_VOCABULARY = EMOTION_LABELS + (NO_FACE,)


@dataclass(frozen=True)
class AdapterManifest:
    """Identity reported by /healthz."""

    kind: str
    model: str
    version: str
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.kind not in EXPERT_KINDS:
            raise ValueError(f"unknown expert kind {self.kind!r}; expected one of {EXPERT_KINDS}")
        if not self.model:
            raise ValueError("manifest needs a model identifier")
        if not self.version:
            raise ValueError("manifest needs a version string")

    def healthz_payload(self) -> dict:
        return {
            "expert": self.kind,
            "model": self.model,
            "version": self.version,
            "device": self.device,
        }
