"""Seed plumbing.

Experiments draw from :class:`numpy.random.Generator` streams derived from a
master seed and an index (game number, generation, ...), so serial and
parallel runs see the same randomness.  MCTS rollouts use splitmix64, which
the compiled kernel and the pure-Python tree share bit for bit.
"""
from __future__ import annotations

import zlib

import numpy as np

_MASK = (1 << 64) - 1


def derive(seed: int, *keys: int | str) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    entropy = [int(seed) & _MASK]
    for k in keys:
        entropy.append(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) & _MASK)
    return np.random.default_rng(entropy)


def draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n
