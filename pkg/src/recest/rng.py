"""SplitMix64 random streams.

The generator has a single 64-bit state ``s``.  Output ``k`` (1-based) of a
stream seeded with ``s`` is ``mix64(s + k * GOLDEN)`` modulo 2**64, where

    GOLDEN = 0x9E3779B97F4A7C15
    mix64(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

Because each output depends only on its counter, blocks of draws are
computed with wrapping ``uint64`` arithmetic and agree bit for bit with
one-at-a-time draws on every platform.

Doubles are ``(z >> 11) * 2**-53`` in ``[0, 1)``.  Normal variates use the
Box-Muller transform on consecutive pairs ``(U1, U2)``:
``r = sqrt(-2 log(1 - U1))``, giving ``r cos(2 pi U2)`` then
``r sin(2 pi U2)``.  An unused second member of a pair is kept for the
next call, so the normal sequence does not depend on how draws are
batched.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["GOLDEN", "MASK64", "SplitMix64", "derive_seed", "mix64"]

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_PI = 2.0 * math.pi


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of replication ``index``: output ``index + 1`` of a stream seeded with ``master_seed``."""
    if index < 0:
        raise ValueError("replication index must be non-negative")
    return mix64(master_seed + (index + 1) * GOLDEN)


class SplitMix64:
    """Counter-based SplitMix64 generator with uniform and normal draws."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64
        self._spare: float | None = None

    def next_uint64(self, n: int | None = None):
        if n is None:
            self.state = (self.state + GOLDEN) & MASK64
            return mix64(self.state)
        k = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + k * np.uint64(GOLDEN)
        self.state = (self.state + n * GOLDEN) & MASK64
        return _mix64_array(z)

    def random(self, n: int | None = None):
        """Uniform doubles on ``[0, 1)``."""
        if n is None:
            return (self.next_uint64() >> 11) * 2.0**-53
        return (self.next_uint64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def standard_normal(self, n: int | None = None):
        if n is None:
            return float(self.standard_normal(1)[0])
        out = np.empty(n)
        start = 0
        if n and self._spare is not None:
            out[0] = self._spare
            self._spare = None
            start = 1
        need = n - start
        if need:
            pairs = (need + 1) // 2
            u = self.random(2 * pairs)
            r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
            ang = _TWO_PI * u[1::2]
            z = np.empty(2 * pairs)
            z[0::2] = r * np.cos(ang)
            z[1::2] = r * np.sin(ang)
            out[start:] = z[:need]
            if 2 * pairs > need:
                self._spare = float(z[-1])
        return out

    def __repr__(self):
        return f"SplitMix64(state={self.state:#018x})"
