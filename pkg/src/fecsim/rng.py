"""Seeded, counter-based random streams.

Every stochastic operation in the package draws from a Philox generator
keyed by (master seed, derived stream index), so runs are reproducible
bit-for-bit and parallel workers can use disjoint substreams.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_stream(seed: int, *indices: int) -> int:
    """Fold (seed, indices...) into a 64-bit substream identifier."""
    h = _splitmix64(seed & _MASK64)
    for ix in indices:
        h = _splitmix64(h ^ (ix & _MASK64))
    return h


def generator(seed: int, *indices: int) -> np.random.Generator:
    """Philox generator for the substream (seed, *indices)."""
    key = np.array([seed & _MASK64, derive_stream(seed, *indices)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
