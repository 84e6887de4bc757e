"""Counter-based random streams.

Every draw is a pure function of ``(key, counter)``: the key is derived from a
user seed plus a stream index (e.g. the trial number), and the counter simply
advances. Streams for different trials never share state, so trials can be
run in any order or in parallel and still reproduce bit-for-bit.

The mixing function is the SplitMix64 finalizer. The same arithmetic is
compiled with numba for the branching kernels; ``tests/test_rng.py`` checks
that both paths agree.
"""

from __future__ import annotations

import bisect
from typing import Sequence

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / (1 << 53)


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, stream: int = 0) -> int:
    """Key for the ``stream``-th independent stream under ``seed``."""
    k = _finalize((seed & MASK64) ^ GOLDEN)
    return _finalize((k + ((stream + 1) * _STREAM_MULT)) & MASK64)


def counter_u64(key: int, counter: int) -> int:
    return _finalize((key + (counter + 1) * GOLDEN) & MASK64)


class CounterRNG:
    """A seeded stream of 64-bit values, uniforms and weighted choices."""

    __slots__ = ("seed", "stream", "key", "counter")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.key = derive_key(self.seed, self.stream)
        self.counter = 0

    def __repr__(self):
        return f"CounterRNG(seed={self.seed}, stream={self.stream}, counter={self.counter})"

    def next_u64(self) -> int:
        v = counter_u64(self.key, self.counter)
        self.counter += 1
        return v

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.random() * n)

    def choice_cdf(self, cdf: Sequence[float]) -> int:
        """Index drawn from a cumulative distribution whose last entry is the total mass."""
        u = self.random() * cdf[-1]
        i = bisect.bisect_right(cdf, u)
        return min(i, len(cdf) - 1)


# numba mirrors of the functions above; uint64 arithmetic wraps mod 2**64.

@numba.njit(cache=True)
def nb_finalize(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def nb_derive_key(seed, stream):
    k = nb_finalize(np.uint64(seed) ^ np.uint64(GOLDEN))
    return nb_finalize(k + (np.uint64(stream) + np.uint64(1)) * np.uint64(_STREAM_MULT))


@numba.njit(cache=True)
def nb_uniform(key, counter):
    z = nb_finalize(key + (np.uint64(counter) + np.uint64(1)) * np.uint64(GOLDEN))
    return np.float64(z >> np.uint64(11)) * _INV_2_53
