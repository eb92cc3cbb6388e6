"""Seeded, splittable random streams.

A stream is identified by a root seed and a path of labels.  The path is
hashed into a 128-bit Philox key with SplitMix64 finalizers, so any stream
can be rebuilt without touching its siblings.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & MASK64
    h = 0xCBF29CE484222325  # FNV-1a over utf-8 bytes
    for b in str(label).encode():
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


def derive_key(seed: int, *path) -> tuple[int, int]:
    """Two 64-bit words deterministically mixed from ``seed`` and ``path``."""
    a = splitmix64(int(seed) & MASK64)
    b = splitmix64(a ^ 0x5851F42D4C957F2D)
    for label in path:
        w = _label_word(label)
        a = splitmix64(a ^ w)
        b = splitmix64(b ^ splitmix64(w ^ a))
    return a, b


def stream(seed: int, *path) -> np.random.Generator:
    a, b = derive_key(seed, *path)
    key = np.array([a, b], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
