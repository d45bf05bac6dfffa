"""Seed derivation.

Seeds are plain unsigned 64-bit integers.  Child streams are derived from
a parent seed and a tuple of counters through :class:`numpy.random.SeedSequence`
spawn keys, so a stream depends only on ``(seed, keys)`` and never on how
many other streams were drawn before it.
"""

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def generator(seed, *keys):
    """Return a Generator for the substream ``(seed, *keys)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    """Return a child u64 seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])
