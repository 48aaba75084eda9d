"""Chat-completion client plus lexical hallucination validation.

``complete`` sends a rendered prompt to a chat endpoint (or synthesizes a
deterministic caption in-process for the mock endpoint). ``validate_caption``
scans the returned text for color and emotion words the chunk never licensed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ._hash import hash64
from .chunk import CHUNK_VERSION, InformationChunk, ParsedChunk, parse_chunk
from .experts import BackendRef, HttpClient, ProtocolError
from .prompts import CHUNK_HEADER, PromptStrategy, RenderedPrompt
from .style import default_color_table
from .tone import EMOTIONS

DEFAULT_MODEL_ID = "composer-7b"
DEFAULT_TEMPERATURE = 0.2
DEFAULT_MAX_TOKENS = 300

# Words that count as invoking an emotion during validation. The canonical
# label plus common adjective/noun forms; scanning is word-boundary exact,
# so e.g. "amazing" does not hit "amazed".
EMOTION_SYNONYMS: dict[str, tuple[str, ...]] = {
    "neutral": ("neutral", "indifferent"),
    "disgust": ("disgust", "disgusted", "revulsion", "repulsed"),
    "happy": ("happy", "happiness", "joy", "joyful", "cheerful", "delighted"),
    "anger": ("anger", "angry", "furious", "enraged"),
    "contempt": ("contempt", "contemptuous", "scornful", "disdain"),
    "sad": ("sad", "sadness", "sorrowful", "mournful", "unhappy"),
    "fear": ("fear", "fearful", "afraid", "scared", "terrified"),
    "surprise": ("surprise", "surprised", "astonished", "amazed", "startled"),
}

_WORD = re.compile(r"[a-z_]+")


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    """Lexical hallucination scan result.

    flagged_colors: color vocabulary words the chunk never licensed.
    flagged_emotions: emotion words neither licensed nor matching the tone.
    """

    flagged_colors: tuple[str, ...]
    flagged_emotions: tuple[str, ...]
    passed: bool

    def __post_init__(self) -> None:
        expect = not self.flagged_colors and not self.flagged_emotions
        if self.passed != expect:
            raise ValueError("passed must reflect empty flag lists")


def _report(flagged_colors: tuple[str, ...], flagged_emotions: tuple[str, ...]) -> ValidationReport:
    return ValidationReport(
        flagged_colors=flagged_colors,
        flagged_emotions=flagged_emotions,
        passed=not flagged_colors and not flagged_emotions,
    )


@dataclass(frozen=True)
class HolisticCaption:
    """One composed description for one video under one strategy."""

    video_id: str
    strategy: PromptStrategy
    prompt_hash: int
    text: str
    model_id: str
    sampling: SamplingParams
    validation: ValidationReport

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("holistic caption text must be non-empty")


def _words(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def _emotion_of(word: str) -> str | None:
    for emotion, forms in EMOTION_SYNONYMS.items():
        if word in forms:
            return emotion
    return None


def validate_caption(text: str, chunk: InformationChunk | str) -> ValidationReport:
    """Flag color and emotion words the chunk does not license.

    A color name is licensed when it appears, word for word, anywhere in the
    chunk's rendered text (style names always do). An emotion word is
    licensed when it appears in the chunk text or canonicalizes to the
    chunk's tone label. The scan is case-insensitive and word-boundary
    exact over the 147-name color vocabulary and the fixed emotion lists.
    """
    if isinstance(chunk, InformationChunk):
        rendered = chunk.rendered
        tone_label = chunk.tone.tone
    else:
        rendered = chunk
        tone_label = parse_chunk(chunk).tone_label

    licensed = set(_words(rendered))
    color_names = set(default_color_table().names)

    flagged_colors: list[str] = []
    flagged_emotions: list[str] = []
    for word in _words(text):
        if word in licensed:
            continue
        if word in color_names:
            if word not in flagged_colors:
                flagged_colors.append(word)
            continue
        emotion = _emotion_of(word)
        if emotion is not None and emotion != tone_label and word not in flagged_emotions:
            flagged_emotions.append(word)
    return _report(tuple(flagged_colors), tuple(flagged_emotions))


def _chunk_from_prompt(prompt_text: str) -> ParsedChunk:
    marker = f"{CHUNK_HEADER}\n"
    at = prompt_text.rfind(marker)
    if at < 0:
        raise ProtocolError(f"prompt carries no {CHUNK_HEADER!r} block")
    return parse_chunk(prompt_text[at + len(marker):])


def mock_complete(prompt_text: str) -> str:
    """Deterministic in-process completion.

    Parses the chunk back out of the prompt and stitches its facets with
    fixed connectives, using only words the chunk itself licenses: the
    first and last visual captions verbatim, a leading dialogue snippet cut
    at word boundaries, the tone label, and the style names.
    """
    parsed = _chunk_from_prompt(prompt_text)
    captions = [caption for _, caption in parsed.visual_entries]
    first, last = captions[0], captions[-1]
    styles = " and ".join(parsed.style_names)
    sentences = [f"The video opens with {first} and closes with {last}."]
    if parsed.dialogue_text:
        snippet = " ".join(parsed.dialogue_text.split()[:12])
        sentences.append(f'Voices say "{snippet}".')
    sentences.append(f"The overall mood reads {parsed.tone_label}, over a palette of {styles}.")
    return " ".join(sentences)


def complete(
    prompt: RenderedPrompt,
    backend: BackendRef,
    model_id: str = DEFAULT_MODEL_ID,
    sampling: SamplingParams = SamplingParams(),
    http: HttpClient | None = None,
) -> str:
    """Raw caption text for a rendered prompt.

    Mock backends synthesize locally; HTTP backends get a single-turn chat
    request. Empty completions are protocol errors either way.
    """
    if backend.is_mock:
        return mock_complete(prompt.text)
    body = {
        "model": model_id,
        "messages": [{"role": "user", "content": prompt.text}],
        "temperature": sampling.temperature,
        "max_tokens": sampling.max_tokens,
    }
    http = http or HttpClient()
    payload = http.request_json("POST", f"{backend.url}/v1/chat", body)
    text = payload.get("text")
    if not isinstance(text, str) or not text:
        raise ProtocolError(f"chat backend returned no usable 'text': {payload!r}")
    return text


def compose_holistic(
    video_id: str,
    prompt: RenderedPrompt,
    chunk: InformationChunk,
    backend: BackendRef,
    model_id: str = DEFAULT_MODEL_ID,
    sampling: SamplingParams = SamplingParams(),
    http: HttpClient | None = None,
) -> HolisticCaption:
    """Complete the prompt and validate the result against its chunk."""
    text = complete(prompt, backend, model_id=model_id, sampling=sampling, http=http)
    return HolisticCaption(
        video_id=video_id,
        strategy=prompt.strategy,
        prompt_hash=hash64(prompt.text.encode("utf-8")),
        text=text,
        model_id=model_id if not backend.is_mock else "mock",
        sampling=sampling,
        validation=validate_caption(text, chunk),
    )
