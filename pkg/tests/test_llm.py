import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from holocap._hash import hash64
from holocap.chunk import compose_chunk, render_chunk_text
from holocap.experts import (
    ABSENT_DIALOGUE,
    MOCK,
    BackendRef,
    DialogueAnnotation,
    HttpClient,
    ProtocolError,
    visual_annotation_from_captions,
)
from holocap.llm import (
    EMOTION_SYNONYMS,
    HolisticCaption,
    SamplingParams,
    ValidationReport,
    complete,
    compose_holistic,
    mock_complete,
    validate_caption,
)
from holocap.prompts import PromptStrategy, render_prompt
from holocap.style import StyleAnnotation, default_color_table
from holocap.tone import EMOTIONS, ToneAnnotation


def make_chunk(
    captions=("a dog runs", "a cat naps"),
    dialogue="hello there",
    tone="happy",
    styles=("black", "white"),
):
    if dialogue:
        dlg = DialogueAnnotation(dialogue, "en", False, True)
    else:
        dlg = ABSENT_DIALOGUE
    return compose_chunk(
        visual_annotation_from_captions(list(captions)),
        dlg,
        ToneAnnotation(tone=tone, counts={tone: 1}, frames_considered=1),
        StyleAnnotation(top_colors=tuple(styles), histogram={s: 1 for s in styles}),
    )


class FakeTransport:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, method, url, body, timeout):
        self.calls.append((method, url, body))
        return self.responses.pop(0)


# ------------------------------------------------------------------ validation


def test_licensed_style_names_pass():
    chunk = make_chunk(styles=("firebrick", "rosybrown"))
    report = validate_caption("a scene in firebrick and rosybrown light", chunk)
    assert report.passed
    assert report.flagged_colors == ()
    assert report.flagged_emotions == ()


def test_unlicensed_color_flagged():
    chunk = make_chunk(styles=("black",))
    report = validate_caption("a crimson banner waves", chunk)
    assert report.flagged_colors == ("crimson",)
    assert not report.passed


def test_empty_text_passes():
    report = validate_caption("", make_chunk())
    assert report.passed


def test_color_licensed_by_caption_text():
    chunk = make_chunk(captions=("a crimson banner on a wall", "a crowd below"))
    assert validate_caption("the crimson banner", chunk).passed


def test_emotion_mismatching_tone_flagged():
    chunk = make_chunk(tone="happy")
    report = validate_caption("a surprised man walks in", chunk)
    assert report.flagged_emotions == ("surprised",)
    assert not report.passed


def test_emotion_matching_tone_passes():
    chunk = make_chunk(tone="happy")
    assert validate_caption("a joyful scene full of happiness", chunk).passed


def test_emotion_licensed_by_dialogue_text():
    chunk = make_chunk(dialogue="I was so scared back then", tone="neutral")
    assert validate_caption("someone sounds scared", chunk).passed


def test_scan_is_word_boundary_exact():
    chunk = make_chunk(tone="happy", styles=("white",))
    # neither "blackish" nor "amazing" is a vocabulary word
    assert validate_caption("a blackish, amazing backdrop", chunk).passed
    assert not validate_caption("a black backdrop", chunk).passed


def test_scan_is_case_insensitive():
    chunk = make_chunk(styles=("white",))
    report = validate_caption("CRIMSON light", chunk)
    assert report.flagged_colors == ("crimson",)


def test_flags_keep_first_appearance_order_and_dedupe():
    chunk = make_chunk(tone="happy", styles=("white",))
    report = validate_caption("crimson plum crimson azure and a furious scared look", chunk)
    assert report.flagged_colors == ("crimson", "plum", "azure")
    assert report.flagged_emotions == ("furious", "scared")


def test_validate_accepts_rendered_text():
    text = render_chunk_text([("frame01", "a dog")], "", "surprise", ("black",))
    assert validate_caption("the dog looks surprised", text).passed
    assert not validate_caption("the dog looks angry", text).passed


def test_report_consistency_enforced():
    with pytest.raises(ValueError, match="passed"):
        ValidationReport(flagged_colors=("red",), flagged_emotions=(), passed=True)


def test_synonym_lists_cover_all_emotions():
    assert set(EMOTION_SYNONYMS) == set(EMOTIONS)
    for emotion, forms in EMOTION_SYNONYMS.items():
        assert emotion in forms


word = st.sampled_from(
    "a the dog cat runs sits wall banner crowd below light scene".split()
)


@given(st.lists(word, min_size=1, max_size=8), st.sampled_from(EMOTIONS))
def test_property_appending_licensed_words_is_monotone(words, tone):
    chunk = make_chunk(captions=(" ".join(words), "a closing shot"), tone=tone)
    base = "the video shows " + " ".join(words)
    report = validate_caption(base, chunk)
    licensed = re.findall(r"[a-z_]+", chunk.rendered.lower())
    extended = validate_caption(base + " " + " ".join(licensed[:10]), chunk)
    assert extended.passed == report.passed
    assert extended.flagged_colors == report.flagged_colors


# ------------------------------------------------------------ mock completion


def test_mock_completion_contract():
    chunk = make_chunk(
        captions=("a dog runs", "a cat naps", "a bird lands"),
        dialogue="hello there my good friend from the city of tall towers and beyond",
        tone="happy",
        styles=("black", "white"),
    )
    prompt = render_prompt(PromptStrategy.RULE, chunk)
    out = mock_complete(prompt.text)
    snippet = " ".join(chunk.dialogue.transcript_en.split()[:12])
    expected = (
        "The video opens with a dog runs and closes with a bird lands. "
        f'Voices say "{snippet}". '
        "The overall mood reads happy, over a palette of black and white."
    )
    assert out == expected


def test_mock_completion_without_dialogue():
    chunk = make_chunk(dialogue="", tone="neutral", styles=("gray",))
    prompt = render_prompt(PromptStrategy.BASIC, chunk)
    out = mock_complete(prompt.text)
    assert "Voices say" not in out
    assert "The overall mood reads neutral, over a palette of gray." in out


def test_mock_spec_minimal_chunk_mentions_tone_and_style():
    chunk = make_chunk(captions=("an empty room",), dialogue="", tone="neutral", styles=("black",))
    prompt = render_prompt(PromptStrategy.RULE, chunk)
    out = complete(prompt, BackendRef(MOCK))
    assert "neutral" in out
    assert "black" in out


def test_mock_prompt_without_chunk_header_rejected():
    with pytest.raises(ProtocolError, match="INFORMATION CHUNK"):
        mock_complete("no chunk in sight")


color_names = st.sampled_from(default_color_table().names)
caption_text = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FFF), min_size=1, max_size=30
).filter(lambda s: not re.search(r", frame\d{2,}: ", s))


@given(
    st.lists(caption_text, min_size=1, max_size=5),
    st.text(max_size=50),
    st.sampled_from(EMOTIONS),
    st.lists(color_names, min_size=1, max_size=2, unique=True),
    st.sampled_from(list(PromptStrategy)),
)
def test_property_mock_output_always_validates(captions, dialogue, tone, styles, strategy):
    chunk = make_chunk(captions=captions, dialogue=dialogue, tone=tone, styles=styles)
    prompt = render_prompt(strategy, chunk)
    out = mock_complete(prompt.text)
    assert validate_caption(out, chunk).passed


# ------------------------------------------------------------------- complete


def test_complete_http_wire_format():
    transport = FakeTransport([(200, {"text": "a fine description"})])
    http = HttpClient(transport=transport, sleep=lambda s: None)
    chunk = make_chunk()
    prompt = render_prompt(PromptStrategy.RULE, chunk)
    out = complete(prompt, BackendRef("http://svc"), model_id="m1", http=http)
    assert out == "a fine description"
    method, url, body = transport.calls[0]
    assert (method, url) == ("POST", "http://svc/v1/chat")
    assert body["model"] == "m1"
    assert body["messages"] == [{"role": "user", "content": prompt.text}]
    assert body["temperature"] == 0.2
    assert body["max_tokens"] == 300


def test_complete_rejects_empty_text():
    chunk = make_chunk()
    prompt = render_prompt(PromptStrategy.RULE, chunk)
    for payload in ({"text": ""}, {"other": "x"}):
        http = HttpClient(transport=FakeTransport([(200, payload)]), sleep=lambda s: None)
        with pytest.raises(ProtocolError, match="text"):
            complete(prompt, BackendRef("http://svc"), http=http)


# ----------------------------------------------------------- compose_holistic


def test_compose_holistic_mock():
    chunk = make_chunk()
    prompt = render_prompt(PromptStrategy.RULE, chunk)
    caption = compose_holistic("vid1", prompt, chunk, BackendRef(MOCK))
    assert caption.video_id == "vid1"
    assert caption.strategy is PromptStrategy.RULE
    assert caption.model_id == "mock"
    assert caption.prompt_hash == hash64(prompt.text.encode("utf-8"))
    assert caption.validation.passed
    assert caption.sampling == SamplingParams()


def test_compose_holistic_http_keeps_model_id():
    chunk = make_chunk(styles=("black",))
    prompt = render_prompt(PromptStrategy.BASIC, chunk)
    http = HttpClient(
        transport=FakeTransport([(200, {"text": "a crimson flash"})]), sleep=lambda s: None
    )
    caption = compose_holistic("vid2", prompt, chunk, BackendRef("http://svc"), http=http)
    assert caption.model_id == "composer-7b"
    assert caption.validation.flagged_colors == ("crimson",)
    assert not caption.validation.passed


def test_holistic_caption_requires_text():
    with pytest.raises(ValueError, match="non-empty"):
        HolisticCaption(
            video_id="v",
            strategy=PromptStrategy.RULE,
            prompt_hash=0,
            text="",
            model_id="mock",
            sampling=SamplingParams(),
            validation=ValidationReport((), (), True),
        )
