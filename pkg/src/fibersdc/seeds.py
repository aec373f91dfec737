"""Deterministic named substreams derived from one master seed.

Every stochastic component (source noise, phase drift, accidentals,
bootstrap resampling, ...) pulls its generator from `substream`, so a
single integer reproduces an entire run while keeping the streams
statistically independent of each other.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream_seed(master_seed: int, name: str) -> np.random.SeedSequence:
    """Return a SeedSequence unique to (master_seed, name).

    The name is hashed with SHA-256 so adding new substreams never
    perturbs existing ones, and the result does not depend on Python's
    per-process string hashing.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence(entropy=[int(master_seed) & (2**63 - 1)] + words)


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Generator for the named substream of a master seed."""
    return np.random.default_rng(substream_seed(master_seed, name))
