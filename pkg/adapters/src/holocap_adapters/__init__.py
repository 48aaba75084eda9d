"""Reference HTTP adapters for the holocap expert wire protocol.

Each adapter is one process serving one expert kind (caption, transcribe,
emotion, or chat) plus a /healthz endpoint. The adapters carry no business
logic; they only translate between the wire schemas and an inference
engine. A deterministic stub engine ships with every kind so the protocol
can be exercised without any model installed.
"""

from .manifest import EXPERT_KINDS, AdapterManifest
from .engines import EngineError, EngineUnavailable, build_engine
from .server import AdapterServer, serve
from .conformance import ConformanceReport, conformance_check

__all__ = [
    "EXPERT_KINDS",
    "AdapterManifest",
    "EngineError",
    "EngineUnavailable",
    "build_engine",
    "AdapterServer",
    "serve",
    "ConformanceReport",
    "conformance_check",
]
