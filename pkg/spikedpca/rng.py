"""Seeded random streams.

Every draw goes through a counter-based Philox generator keyed by a
``SeedSequence`` spawn key, so a stream depends only on ``(seed, *key)`` and
never on the order in which trials are executed.
"""

from typing import Sequence

import numpy as np

from spikedpca.errors import InvalidParameter

SEED_MAX = 2**64 - 1


def validate_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream(seed: int, key: Sequence[int] = ()) -> np.random.Generator:
    """Return the generator for ``(seed, *key)``.

    Args:
        seed: 64-bit unsigned master seed.
        key: Integer path identifying the stream (e.g. ``(trial,)``).

    Returns:
        A fresh ``numpy.random.Generator`` backed by Philox.
    """
    seq = np.random.SeedSequence(validate_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
