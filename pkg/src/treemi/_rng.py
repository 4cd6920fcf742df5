"""Seed derivation shared by every sampler.

All randomness comes from numpy's PCG64 seeded through ``SeedSequence``
with a ``spawn_key`` naming the stream, e.g. ``(kind, distance, n_data)``.
Streams are therefore independent of evaluation order.
"""
from __future__ import annotations

import numpy as np


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    if not key:
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def as_rng(seed) -> np.random.Generator:
    """Accept an int, a ``SeedSequence`` or an existing ``Generator``."""
    return np.random.default_rng(seed)
