"""Deterministic 64-bit seed derivation.

Every stochastic component derives its generator from a master seed and an
integer stream index through :func:`mix_seed`, so work can be split across
workers without changing results.
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finalizer (Steele, Lea & Flood 2014)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix_seed(master: int, *indices: int) -> int:
    """Fold ``indices`` into ``master`` and return a 64-bit derived seed."""
    h = splitmix64(master & _MASK)
    for idx in indices:
        h = splitmix64(h ^ (idx & _MASK))
    return h


def derived_rng(master: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(mix_seed(master, *indices))
