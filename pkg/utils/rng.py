"""Seeded random streams.

Every stream is a numpy ``Generator`` over PCG64 seeded with
``SeedSequence(entropy=master_seed, spawn_key=keys)``. Deriving per-trace and
per-cell streams from their keys keeps experiments reproducible no matter how
work is scheduled.
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("ascii"))
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return int(key)


def derive_rng(master_seed: int, *keys: Key) -> np.random.Generator:
    seq = np.random.SeedSequence(
        entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=tuple(_key_to_int(k) for k in keys),
    )
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(master_seed: int, *keys: Key) -> int:
    """64-bit seed for a child experiment (repetition, sweep cell)"""
    seq = np.random.SeedSequence(
        entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=tuple(_key_to_int(k) for k in keys),
    )
    return int(seq.generate_state(1, dtype=np.uint64)[0])
