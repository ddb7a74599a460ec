"""Deterministic hashing primitives: FNV-1a (64-bit) and splitmix64.

These are normative for the mock backends, cache keys, and crop sampling:
two independently constructed mocks must agree byte-for-byte, so the exact
constants and update order matter. Keep them bit-stable.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

_GOLDEN = 0x9E3779B97F4A7C15


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over the given bytes."""
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


class SplitMix64:
    """splitmix64 sequence generator over a 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64


def derive_seed(seed: int, index: int) -> int:
    """Mix a base seed with a small index into an independent stream seed."""
    return SplitMix64((seed ^ ((index + 1) * _GOLDEN)) & MASK64).next()


def unit_vector(seed: int, dim: int = 512) -> np.ndarray:
    """Deterministic L2-normalized vector from a 64-bit seed.

    Draws ``dim`` raws via splitmix64, maps each to [-1, 1) as
    ((r >> 11) / 2^53) * 2 - 1, then normalizes.
    """
    rng = SplitMix64(seed)
    raw = np.fromiter(
        (((rng.next() >> 11) / float(1 << 53)) * 2.0 - 1.0 for _ in range(dim)),
        dtype=np.float64,
        count=dim,
    )
    return raw / np.linalg.norm(raw)
