"""Portable pseudo-random streams: xoshiro256++ seeded through splitmix64.

Pure Python integer arithmetic so that every platform yields the same bits.
Normal deviates use the Box-Muller transform, both members of each pair are
used in order and a trailing spare is discarded.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Xoshiro256pp:
    """xoshiro256++ generator.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64 and expanded to 256 bits of state
        with four splitmix64 outputs.
    state : sequence of 4 ints, optional
        Raw state, bypassing seeding (used for reference vectors).
    """

    def __init__(self, seed: int = 0, state=None):
        if state is not None:
            s = [int(v) & _MASK for v in state]
        else:
            sm = int(seed) & _MASK
            s = []
            for _ in range(4):
                sm, out = splitmix64(sm)
                s.append(out)
        if not any(s):
            raise ValueError("xoshiro256++ state must not be all zero")
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s0 + s3) & _MASK
        result = ((((x << 23) | (x >> 41)) & _MASK) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform double on [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randbelow(self, bound: int) -> int:
        """Unbiased integer in ``[0, bound)`` by rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def sign(self) -> int:
        """+1 or -1 with equal probability (top bit of one draw)."""
        return 1 if self.next_u64() >> 63 else -1

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)

    def normals(self, count: int) -> np.ndarray:
        out = np.empty(count)
        s0, s1, s2, s3 = self._s
        i = 0
        while i < count:
            # two raw draws per Box-Muller pair, inlined for speed
            u = []
            for _ in range(2):
                x = (s0 + s3) & _MASK
                r = ((((x << 23) | (x >> 41)) & _MASK) + s0) & _MASK
                t = (s1 << 17) & _MASK
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
                u.append((r >> 11) * _INV_2_53)
            radius = math.sqrt(-2.0 * math.log(1.0 - u[0]))
            angle = _TWO_PI * u[1]
            out[i] = radius * math.cos(angle)
            if i + 1 < count:
                out[i + 1] = radius * math.sin(angle)
            i += 2
        self._s = [s0, s1, s2, s3]
        return out


def standard_normals(seed: int, count: int) -> np.ndarray:
    """First ``count`` standard normal deviates of the stream for ``seed``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return Xoshiro256pp(seed).normals(count)
