"""Deterministic seed derivation.

All randomness in the package flows through generators derived here, so a run
is a pure function of its configured seed: no global RNG state, no dependence
on evaluation order or thread count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_BYTES = 8


def stable_hash64(*parts: int | str | bytes) -> int:
    """Hash a sequence of ints/strings/bytes to a 64-bit seed.

    Uses BLAKE2b so the value is stable across processes and platforms
    (Python's builtin ``hash`` is salted per process).
    """
    h = hashlib.blake2b(digest_size=_SEED_BYTES)
    for part in parts:
        if isinstance(part, bytes):
            h.update(b"b")
            h.update(part)
        elif isinstance(part, str):
            h.update(b"s")
            h.update(part.encode("utf-8"))
        elif isinstance(part, (int, np.integer)):
            h.update(b"i")
            h.update(int(part).to_bytes(16, "little", signed=True))
        else:
            raise TypeError(f"unhashable seed part of type {type(part)!r}")
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def derive_seed(*parts: int | str | bytes) -> int:
    """Derive a child seed from arbitrary labelled parts."""
    return stable_hash64(*parts)


def derive_rng(*parts: int | str | bytes) -> np.random.Generator:
    """Create a generator whose stream depends only on ``parts``."""
    return np.random.default_rng(stable_hash64(*parts))


def chromosome_key(bits: np.ndarray) -> bytes:
    """Canonical byte representation of a bit vector (cache/seed key)."""
    packed = np.packbits(bits.astype(np.uint8, copy=False))
    return len(bits).to_bytes(4, "little") + packed.tobytes()
