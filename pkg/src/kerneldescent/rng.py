"""Named deterministic random streams.

Every stochastic piece of the package draws from a child generator
derived from (master seed, purpose tag, index). Children are
statistically independent and reproducible regardless of evaluation
order or worker partitioning: the tag is hashed into the SeedSequence
spawn key, so stream identity depends only on the three arguments.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed_sequence(master_seed: int, tag: str, index: int = 0) -> np.random.SeedSequence:
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
    return np.random.SeedSequence(master_seed, spawn_key=words + (index,))


def child_rng(master_seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """PCG64 generator for the (seed, tag, index) stream."""
    return np.random.default_rng(child_seed_sequence(master_seed, tag, index))
