"""Seeded, splittable random streams.

All Monte Carlo drivers derive one stream per (master seed, trial index)
so results do not depend on how trials are chunked across workers.
Philox is counter-based, so streams are cheap to create and independent.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the RNG stream identified by ``seed`` and an integer key path."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
