"""Counter-based SplitMix64 ("SplitMix64-CTR").

Every random word is a pure function of ``(master_seed, stream_id, counter)``::

    key  = mix64(master_seed ^ mix64((stream_id + 1) * GAMMA))
    word = mix64(key + (counter + 1) * GAMMA)            (all mod 2**64)

so ``draw(key, 0), draw(key, 1), ...`` is exactly the SplitMix64 sequence
seeded with ``key``.  Test vectors (SplitMix64 seeded with 0)::

    draw(0, 0) == 0xE220A8397B1DCDAF
    draw(0, 1) == 0x6E789E6AA1B965F4
    draw(0, 2) == 0x06C45D188009454F

Floats use the top 53 bits: ``(word >> 11) * 2**-53`` in ``[0, 1)``.
"""
import math

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
TWO_M53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, stream_id: int = 0) -> int:
    return mix64((master_seed & MASK64) ^ mix64(((stream_id + 1) * GAMMA) & MASK64))


def draw(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GAMMA)


def to_unit(word: int) -> float:
    return (word >> 11) * TWO_M53


class CounterRNG:
    """Sequential view of one stream, for code that is not performance critical."""

    def __init__(self, master_seed: int, stream_id: int = 0, counter: int = 0):
        self.key = stream_key(master_seed, stream_id)
        self.counter = counter

    def next_u64(self) -> int:
        w = draw(self.key, self.counter)
        self.counter += 1
        return w

    def random(self) -> float:
        return to_unit(self.next_u64())

    def exponential(self, rate: float = 1.0) -> float:
        return -math.log1p(-self.random()) / rate

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (exactly unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            w = self.next_u64()
            if w < limit:
                return w % n

    def bernoulli_array(self, p: float, size: int) -> np.ndarray:
        counters = np.arange(self.counter, self.counter + size, dtype=np.uint64)
        self.counter += size
        return uniform_array(self.key, counters) < p

    def uniform_array(self, size: int) -> np.ndarray:
        counters = np.arange(self.counter, self.counter + size, dtype=np.uint64)
        self.counter += size
        return uniform_array(self.key, counters)


# ---------------------------------------------------------------- vectorized

def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MUL1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def draw_array(key: int, counters: np.ndarray) -> np.ndarray:
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (c + np.uint64(1)) * np.uint64(GAMMA)
        return _mix64_array(z)


def uniform_array(key: int, counters: np.ndarray) -> np.ndarray:
    return (draw_array(key, counters) >> np.uint64(11)).astype(np.float64) * TWO_M53


def site_counters(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Counter for a lattice site: 32-bit two's complement x in the high word, y low."""
    x = np.asarray(xs, dtype=np.int64).astype(np.uint64) & np.uint64(0xFFFFFFFF)
    y = np.asarray(ys, dtype=np.int64).astype(np.uint64) & np.uint64(0xFFFFFFFF)
    return (x << np.uint64(32)) | y


def site_uniforms(key: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return uniform_array(key, site_counters(xs, ys))


# --------------------------------------------------------------------- numba

@njit(cache=True)
def nb_draw(key, counter):
    z = np.uint64(key) + (np.uint64(counter) + np.uint64(1)) * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def nb_uniform(key, counter):
    return np.float64(nb_draw(key, counter) >> np.uint64(11)) * TWO_M53
