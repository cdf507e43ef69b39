"""Keyed random substreams.

Every random draw in the package comes from a generator derived from a
master seed plus a key path such as ``("weights", step, block)``.  Results
therefore depend only on the key, never on evaluation order or on how many
workers share the work.
"""
import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def _key_word(key):
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    key = int(key)
    if key < 0:
        raise ValueError("substream keys must be non-negative")
    return key


def substream(seed, *keys):
    """Return a ``numpy.random.Generator`` for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(_key_word(k) for k in keys))
    return np.random.default_rng(ss)


def derive_seed(seed, *keys):
    """A 64-bit child seed; used to hand independent seeds to sub-algorithms."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(_key_word(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
