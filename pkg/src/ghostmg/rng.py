"""Deterministic random streams for reproducible experiments.

xorshift64* generator seeded through splitmix64, so the same (seed, count)
always yields the same field no matter what platform numpy was built for.
"""

import numpy as np

_MASK = (1 << 64) - 1
_STAR = 2685821657736338717
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x):
    """One splitmix64 step; used to spread small user seeds over 64 bits."""
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


class XorShift64Star:
    """Minimal xorshift64* stream.

    Parameters
    ----------
    seed : int
        Any non-negative integer; internally remixed so seed=0 is fine.
    """

    def __init__(self, seed=42):
        carry, state = _splitmix64(int(seed) & _MASK)
        if state == 0:
            # xorshift must never sit at the all-zero state
            _, state = _splitmix64(carry)
        self._state = state

    def next_u64(self):
        s = self._state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK
        s ^= s >> 27
        self._state = s
        return (s * _STAR) & _MASK

    def uniform(self):
        """One draw from [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0**-53)

    def uniform_symmetric(self, n):
        """n draws from (-1, 1) as a float64 array, stream order preserved."""
        out = np.empty(int(n), dtype=np.float64)
        for i in range(int(n)):
            out[i] = 2.0 * self.uniform() - 1.0
        return out
