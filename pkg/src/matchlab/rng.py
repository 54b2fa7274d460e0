"""Project-wide pseudo-random streams.

Every random draw in the package comes from xoshiro256** seeded through
SplitMix64. A stream is identified by ``(seed, index)``: the 64-bit key
``splitmix64_mix(splitmix64_mix(seed) ^ index)`` seeds a SplitMix64 sequence
whose first four outputs form the xoshiro state. Mixing the seed first keeps
nearby seeds (9 and 10, say) from sharing the same set of trial streams. Streams are vectorised over numpy ``uint64``
arrays so that thousands of independent trials advance in lock step, and a
scalar pure-Python twin (:class:`ScalarStream`) exists for the few sequential
uses and as a cross-check.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_NEG_53 = 1.0 / (1 << 53)


def splitmix64_mix(z: int) -> int:
    """The SplitMix64 finaliser applied to a single 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, index: int) -> int:
    return splitmix64_mix(splitmix64_mix(seed) ^ (index & MASK64))


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class ScalarStream:
    """One xoshiro256** stream in plain Python integers."""

    def __init__(self, seed: int, index: int = 0):
        state = stream_key(seed, index)
        words = []
        for _ in range(4):
            state = (state + GOLDEN_GAMMA) & MASK64
            words.append(splitmix64_mix(state))
        self._s = words

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def below(self, bound: int) -> int:
        """Integer in [0, bound) by multiply-shift (bias below 2**-50 at desk sizes)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * bound) >> 64


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _rotl_array(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class StreamBatch:
    """Many xoshiro256** streams advanced together.

    ``StreamBatch(seed, range(a, b))`` holds the streams for trial indices
    ``a..b-1``; row ``t`` of every draw equals what ``ScalarStream(seed, a + t)``
    would produce.
    """

    def __init__(self, seed: int, indices):
        idx = np.asarray(indices, dtype=np.uint64)
        state = _mix_array(np.uint64(splitmix64_mix(seed)) ^ idx)
        words = []
        for _ in range(4):
            state = state + np.uint64(GOLDEN_GAMMA)
            words.append(_mix_array(state))
        self._s = np.stack(words)

    def __len__(self) -> int:
        return self._s.shape[1]

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self._s
        result = _rotl_array(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s[3] = _rotl_array(s3, 45)
        return result

    def random(self, k: int = 1) -> np.ndarray:
        """Array of shape ``(len(self), k)`` of uniforms in [0, 1)."""
        out = np.empty((len(self), k), dtype=np.float64)
        for c in range(k):
            out[:, c] = (self.next_u64() >> np.uint64(11)).astype(np.float64) * _TWO_NEG_53
        return out


def uniform_block(seed: int, start: int, stop: int, k: int) -> np.ndarray:
    """Uniform weights for trials ``start..stop-1``, ``k`` draws per trial."""
    return StreamBatch(seed, np.arange(start, stop, dtype=np.uint64)).random(k)
