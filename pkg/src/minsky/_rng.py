"""Seed splitting.

Every stochastic component draws from its own stream, derived from the one
user seed and a stable stream name: ``SeedSequence(seed, spawn_key=(crc32(name),))``.
Adding a new stream never perturbs the draws of existing ones.
"""

from __future__ import annotations

import zlib

import numpy as np


def rng_for(seed: int, stream: str) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    key = zlib.crc32(stream.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))
