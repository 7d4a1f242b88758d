"""Seed derivation for independent, reproducible random streams.

Every stream is keyed by the root seed, the replication index and a fixed
stream offset, so strategies in the same replication see the same
environment while their own exploration noise stays separate.
"""

import numpy as np

ENV_DRIFT = 0
SIGNALS = 1
STRATEGY_BASE = 100


def stream(root_seed: int, *key: int) -> np.random.Generator:
    """Generator for ``(root_seed, *key)``; identical keys give identical draws."""
    return np.random.default_rng(np.random.SeedSequence([int(root_seed) & (2**64 - 1), *map(int, key)]))


def strategy_stream(root_seed: int, sim_id: int, strategy_index: int) -> np.random.Generator:
    return stream(root_seed, sim_id, STRATEGY_BASE + strategy_index)
