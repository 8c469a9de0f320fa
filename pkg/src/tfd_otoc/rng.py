"""Seeded random streams.

Every stochastic step draws from ``substream(seed, *keys)``. The stream for a
key tuple is ``numpy.random.default_rng(SeedSequence([seed, len(keys), *keys]))``,
so ``(seed, 3)`` and ``(seed, 3, 0)`` are unrelated streams and the result of a
job never depends on which worker ran it or in what order.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed), len(keys), *(int(k) for k in keys)]
    if any(e < 0 for e in entropy):
        raise ValueError(f"seed and stream keys must be non-negative, got {entropy}")
    return np.random.default_rng(np.random.SeedSequence(entropy))
