"""Deterministic RNG streams.

Every sampler in the package takes an integer seed and derives its stream
from ``SeedSequence(seed, spawn_key=path)``. Two properties matter:

* identical (seed, path) gives a bitwise-identical stream, independent of
  how many workers the harness uses or in which order samples complete;
* distinct paths give statistically independent streams without any
  bookkeeping shared between workers.
"""

from __future__ import annotations

import numpy as np


def rng_from(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, path).

    ``path`` entries are non-negative integers, typically
    (sample_index,) or (sample_index, retry_attempt).
    """
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def sample_seed(seed: int, *path: int) -> int:
    """Derived 64-bit integer seed for the stream at (seed, path).

    Used where an API wants a single integer seed (matrix samplers, CSV
    provenance columns) rather than a Generator; the derivation is the
    same SeedSequence tree as rng_from, so recorded seeds reproduce the
    exact draw.
    """
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])
