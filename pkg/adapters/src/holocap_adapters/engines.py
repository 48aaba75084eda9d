"""Inference engines behind the adapters.

An engine turns one schema-valid request body into one response body and
never touches HTTP. Every expert kind ships a deterministic ``stub``
engine so the wire protocol runs with no model installed; the real
engines load their model at construction time and raise
:class:`EngineUnavailable` when the assets are missing.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os

from .manifest import EMOTION_VOCABULARY, AdapterManifest

VERSION = "0.1.0"


class EngineError(RuntimeError):
    """Engine could not produce a response."""


class EngineUnavailable(EngineError):
    """Model assets or packages for a real engine are not installed."""


def _digest(body: dict) -> str:
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.blake2b(canonical, digest_size=8).hexdigest()


# ---------------------------------------------------------------- stubs


class StubCaptionEngine:
    def __init__(self, device: str = "cpu") -> None:
        self.manifest = AdapterManifest("caption", "stub", VERSION, device)

    def infer(self, body: dict) -> dict:
        return {"caption": f"stub object {_digest(body)[:8]}"}


class StubTranscribeEngine:
    def __init__(self, device: str = "cpu") -> None:
        self.manifest = AdapterManifest("transcribe", "stub", VERSION, device)

    def infer(self, body: dict) -> dict:
        pcm = base64.b64decode(body["pcm16_base64"])
        duration_s = len(pcm) / 2 / body["sample_rate_hz"]
        return {"language": "en", "text": f"stub speech {duration_s:.1f}"}


class StubEmotionEngine:
    def __init__(self, device: str = "cpu") -> None:
        self.manifest = AdapterManifest("emotion", "stub", VERSION, device)

    def infer(self, body: dict) -> dict:
        index = int(_digest(body), 16) % len(EMOTION_VOCABULARY)
        return {"label": EMOTION_VOCABULARY[index]}


class StubChatEngine:
    def __init__(self, device: str = "cpu") -> None:
        self.manifest = AdapterManifest("chat", "stub", VERSION, device)

    def infer(self, body: dict) -> dict:
        return {"text": f"stub completion {_digest(body)[:8]}"}


# ---------------------------------------------------------------- real models


class BlipCaptionEngine:
    """Image captioner backed by a transformers image-to-text pipeline."""

    MODEL_ID = "Salesforce/blip-image-captioning-base"

    def __init__(self, device: str = "cpu") -> None:
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise EngineUnavailable(
                "caption model needs the 'transformers' package (pip install transformers torch)"
            ) from exc
        self._pipe = pipeline("image-to-text", model=self.MODEL_ID, device=device)
        self.manifest = AdapterManifest("caption", "blip", VERSION, device)

    def infer(self, body: dict) -> dict:
        import io

        from PIL import Image

        image = Image.open(io.BytesIO(base64.b64decode(body["png_base64"]))).convert("RGB")
        outputs = self._pipe(image)
        if not outputs or "generated_text" not in outputs[0]:
            raise EngineError(f"captioner returned no text: {outputs!r}")
        return {"caption": outputs[0]["generated_text"].strip()}


class WhisperTranscribeEngine:
    """Speech recognizer/translator backed by openai-whisper."""

    EXPECTED_RATE_HZ = 16_000

    def __init__(self, device: str = "cpu", size: str = "base") -> None:
        try:
            import whisper
        except ImportError as exc:
            raise EngineUnavailable(
                "transcribe model needs the 'openai-whisper' package (pip install openai-whisper)"
            ) from exc
        self._model = whisper.load_model(size, device=device)
        self.manifest = AdapterManifest("transcribe", f"whisper-{size}", VERSION, device)

    def infer(self, body: dict) -> dict:
        import numpy as np

        if body["sample_rate_hz"] != self.EXPECTED_RATE_HZ:
            raise EngineError(f"whisper adapter expects {self.EXPECTED_RATE_HZ} Hz audio")
        pcm = np.frombuffer(base64.b64decode(body["pcm16_base64"]), dtype=np.int16)
        audio = pcm.astype(np.float32) / 32768.0
        result = self._model.transcribe(audio, task=body["task"])
        return {"language": str(result.get("language", "")), "text": str(result["text"]).strip()}


class TorchscriptEmotionEngine:
    """Facial-emotion classifier loaded from a TorchScript archive.

    The archive must map a (1, 3, 256, 256) float tensor in [0, 1] to
    logits over the eight emotion classes. Set ``ADAPTER_EMOTION_WEIGHTS``
    to its path.
    """

    WEIGHTS_ENV = "ADAPTER_EMOTION_WEIGHTS"

    def __init__(self, device: str = "cpu") -> None:
        path = os.environ.get(self.WEIGHTS_ENV)
        if not path or not os.path.isfile(path):
            raise EngineUnavailable(
                f"emotion model needs {self.WEIGHTS_ENV} pointing at a TorchScript archive"
            )
        try:
            import torch
        except ImportError as exc:
            raise EngineUnavailable(
                "emotion model needs the 'torch' package (pip install torch)"
            ) from exc
        self._torch = torch
        self._model = torch.jit.load(path, map_location=device).eval()
        self._device = device
        self.manifest = AdapterManifest("emotion", "emonet-ts", VERSION, device)

    def infer(self, body: dict) -> dict:
        import io

        from PIL import Image

        torch = self._torch
        image = Image.open(io.BytesIO(base64.b64decode(body["png_base64"]))).convert("RGB")
        image = image.resize((256, 256))
        tensor = torch.frombuffer(bytearray(image.tobytes()), dtype=torch.uint8)
        tensor = tensor.reshape(256, 256, 3).permute(2, 0, 1).float().div(255.0).unsqueeze(0)
        with torch.no_grad():
            logits = self._model(tensor.to(self._device))
        index = int(logits.reshape(-1).argmax().item())
        from .manifest import EMOTION_LABELS

        if not 0 <= index < len(EMOTION_LABELS):
            raise EngineError(f"emotion model produced out-of-range class {index}")
        return {"label": EMOTION_LABELS[index]}


class ChatProxyEngine:
    """Forwards chat requests to an upstream service speaking the same schema.

    Set ``ADAPTER_CHAT_UPSTREAM`` to the upstream base URL.
    """

    UPSTREAM_ENV = "ADAPTER_CHAT_UPSTREAM"

    def __init__(self, device: str = "cpu") -> None:
        upstream = os.environ.get(self.UPSTREAM_ENV)
        if not upstream:
            raise EngineUnavailable(
                f"chat proxy needs {self.UPSTREAM_ENV} set to the upstream base URL"
            )
        self._upstream = upstream.rstrip("/")
        self.manifest = AdapterManifest("chat", "proxy", VERSION, device)

    def infer(self, body: dict) -> dict:
        import urllib.request

        request = urllib.request.Request(
            f"{self._upstream}/v1/chat",
            data=json.dumps(body).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=60) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except OSError as exc:
            raise EngineError(f"chat upstream unreachable: {exc}") from exc
        text = payload.get("text")
        if not isinstance(text, str) or not text:
            raise EngineError(f"chat upstream returned no 'text' field: {payload!r}")
        return {"text": text}


ENGINE_FACTORIES = {
    "caption": {"stub": StubCaptionEngine, "blip": BlipCaptionEngine},
    "transcribe": {"stub": StubTranscribeEngine, "whisper": WhisperTranscribeEngine},
    "emotion": {"stub": StubEmotionEngine, "emonet-ts": TorchscriptEmotionEngine},
    "chat": {"stub": StubChatEngine, "proxy": ChatProxyEngine},
}


def build_engine(kind: str, model: str, device: str = "cpu"):
    """Construct the engine serving ``kind`` with the named ``model``."""
    if kind not in ENGINE_FACTORIES:
        raise EngineError(f"unknown expert kind {kind!r}")
    factories = ENGINE_FACTORIES[kind]
    if model not in factories:
        raise EngineError(
            f"unknown {kind} model {model!r}; choose from {sorted(factories)}"
        )
    return factories[model](device=device)
