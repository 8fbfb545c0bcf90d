"""Seeded randomness.

All randomness is drawn from numpy's PCG64 bit generator; normal variates
come from numpy's ziggurat transform (`Generator.standard_normal`). Both are
pinned by numpy's stream-compatibility policy, so a seed gives the same
stream on every platform.

Independent substreams are derived by key splitting: the user's seed is the
entropy of a `SeedSequence` and the substream keys become its `spawn_key`.
"""

from enum import IntEnum

import numpy as np

_SEED_MASK = (1 << 64) - 1


class Stream(IntEnum):
    """Substream keys. One invocation seed fans out into these."""

    DATA = 0
    NOISE = 1
    INIT = 2


def seeded_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for `seed`, or for its substream `keys` when given.

    Any 64-bit seed is accepted; negative seeds are taken modulo 2**64.
    """
    seq = np.random.SeedSequence(
        seed & _SEED_MASK, spawn_key=tuple(int(k) for k in keys)
    )
    return np.random.Generator(np.random.PCG64(seq))


def uint64_stream(rng: np.random.Generator, size: int) -> np.ndarray:
    """Raw 64-bit outputs."""
    return rng.integers(0, _SEED_MASK, size=size, dtype=np.uint64, endpoint=True)
