"""Portable seeded random number generation.

All stochastic components (bootstrap draws, feature subsets, shuffles,
SMOTE interpolation, weight init) draw from SplitMix64 rather than a
platform RNG, so a given seed reproduces bit-identical results anywhere.

SplitMix64 is counter-based: output ``i`` of a stream seeded with ``s``
is ``mix64(s + (i + 1) * GOLDEN)``, which makes bulk generation a pure
vectorized map that agrees exactly with repeated scalar calls.

Substreams: component ``k`` of a run seeded with ``s`` uses the stream
seed ``mix64(s + (k + 1) * SUBSTREAM_SALT)``.  Components must claim
distinct indices; see the call sites for the assignment.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SUBSTREAM_SALT = 0xD1B54A32D192ED03

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)


def mix64(z: int) -> int:
    """The SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64, matching the scalar path.
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """A deterministic 64-bit stream with scalar and bulk interfaces.

    The bulk methods advance the stream exactly as the equivalent
    sequence of scalar calls would.
    """

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64
        self._counter = 0

    def next_u64(self) -> int:
        self._counter += 1
        return mix64(self._state + self._counter * _GOLDEN)

    def uniform(self) -> float:
        """A double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, n: int) -> int:
        """An integer in [0, n), computed as floor(uniform() * n).

        Exact for any n <= 2**53, which covers every use here.
        """
        if n <= 0:
            raise ValueError(f"randint bound must be positive, got {n}")
        return int(self.uniform() * n)

    def uniform_array(self, n: int) -> np.ndarray:
        """n doubles in [0, 1), identical to n scalar uniform() calls."""
        if n < 0:
            raise ValueError("n must be non-negative")
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        states = np.uint64(self._state) + idx * _U_GOLDEN
        self._counter += n
        bits = _mix64_array(states) >> np.uint64(11)
        return bits.astype(np.float64) * 2.0**-53

    def randint_array(self, n: int, bound: int) -> np.ndarray:
        """n integers in [0, bound), matching n scalar randint calls."""
        u = self.uniform_array(n)
        return (u * bound).astype(np.int64)

    def shuffle(self, arr: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(arr) - 1, 0, -1):
            j = self.randint(i + 1)
            arr[i], arr[j] = arr[j], arr[i]

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n)
        self.shuffle(out)
        return out


def substream(seed: int, index: int) -> SplitMix64:
    """The stream for component ``index`` of a run seeded with ``seed``."""
    if index < 0:
        raise ValueError("substream index must be non-negative")
    return SplitMix64(mix64(seed + (index + 1) * _SUBSTREAM_SALT))
