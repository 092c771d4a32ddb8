"""Seed derivation for reproducible, schedule-independent Monte Carlo.

Every random routine in this package accepts a ``seed`` that may be an int,
a ``numpy.random.SeedSequence`` or an already-built ``numpy.random.Generator``.
Replication streams are derived by extending the SeedSequence entropy with
integer keys, which is numpy's documented stable-hash contract: the derived
stream depends only on the key tuple, never on scheduling order.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def as_generator(seed) -> np.random.Generator:
    """Coerce an int, SeedSequence or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master_seed, *key).

    The same key tuple always yields the same stream, so work items can be
    scheduled on any thread in any order without changing results.
    """
    entropy = [int(master_seed)] + [int(k) for k in key]
    return np.random.default_rng(np.random.SeedSequence(entropy))
