"""Stable 64-bit content hashing used for mock determinism and seed fan-out."""

from __future__ import annotations

import hashlib
import json
from typing import Any


def hash64(data: bytes) -> int:
    """64-bit content hash of raw bytes (blake2b-8, host-independent)."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def hash64_hex(data: bytes) -> str:
    """Hex form of :func:`hash64`, zero-padded to 16 chars."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def canonical_json_bytes(obj: Any) -> bytes:
    """Canonical UTF-8 JSON encoding (sorted keys, no whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def mix_seed(seed: int, *parts: bytes | str | int) -> int:
    """Derive a sub-seed from a base seed and identifying parts.

    Stable across runs and hosts; used to fan one config seed out to
    per-video and per-frame randomness.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(8, "big", signed=False))
    for part in parts:
        if isinstance(part, str):
            part = part.encode("utf-8")
        elif isinstance(part, int):
            part = part.to_bytes(8, "big", signed=False)
        h.update(b"\x00")
        h.update(part)
    return int.from_bytes(h.digest(), "big")
