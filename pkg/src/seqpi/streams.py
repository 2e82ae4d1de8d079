"""Per-replicate random streams.

Replicate ``r`` under ``seed`` draws from ``Philox(key=seed, counter=r << 192)``:
counter-based, so any replicate can be regenerated independently of the
others and of scheduling.
"""

import zlib

import numpy as np

_STREAM_SHIFT = 192


def replicate_bitgen(seed: int, index: int) -> np.random.Philox:
    if seed < 0 or index < 0:
        raise ValueError("seed and replicate index must be non-negative")
    return np.random.Philox(key=seed, counter=index << _STREAM_SHIFT)


def replicate_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(replicate_bitgen(seed, index))


def substream_seed(seed: int, name: str) -> int:
    """64-bit seed for the named substream (``"data"``, ``"calibration"``, ...)."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))
    return int(ss.generate_state(1, np.uint64)[0])


def substream_generator(seed: int, name: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=substream_seed(seed, name)))
