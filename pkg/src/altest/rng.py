"""Counter-based RNG streams: one root seed, independent substreams keyed by
integer tuples, so trials/subsets/roles can be generated in any order (or in
parallel) with identical results."""

import numpy as np


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by ``key`` under ``seed``.

    Same (seed, key) always yields the same stream; distinct keys yield
    statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))
