"""Stable per-cell random streams derived from a master seed."""

from __future__ import annotations

import zlib

import numpy as np

_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mix."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _key(part) -> int:
    if isinstance(part, str):
        # names, not positions, so adding a mechanism or imputer leaves other cells alone
        return zlib.crc32(part.encode("utf-8")) | (1 << 32)
    return int(part) & _MASK


def derive_seed(master_seed: int, *parts) -> int:
    seed = mix64(int(master_seed) & _MASK)
    for part in parts:
        seed = mix64(seed ^ _key(part))
    return seed


def stream(master_seed: int, *parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *parts))
