"""Stable seed derivation so every unit of work owns an isolated RNG stream.

Python's built-in hash() is salted per process, so seeds are derived from a
cryptographic digest of the key parts; the same key gives the same seed in
any process on any platform.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts: object) -> int:
    """A 63-bit seed keyed by the given parts (stringified, order-sensitive)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
