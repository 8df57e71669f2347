"""Deterministic random numbers for partitioning and generation.

xorshift64* with the canonical 12/25/27 shift triple and the 2685821657736338717
multiplier. Chosen over random.Random so layouts are reproducible from a small,
documented recurrence on any platform. Seeds are folded through splitmix64 so
consecutive small seeds do not produce correlated streams.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_MULT = 0x2545F4914F6CDD1D
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

__all__ = ["XorShift64Star", "fnv1a64", "MASK64"]


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash, used to fold strings into seeds."""
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK64
    return h


class XorShift64Star:
    """Seeded xorshift64* stream with rejection-sampled bounded draws."""

    def __init__(self, seed: int):
        state = _splitmix64(seed & MASK64)
        if state == 0:
            state = _SPLITMIX_GAMMA
        self._state = state

    def next64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * _MULT) & MASK64

    def below(self, n: int) -> int:
        """Uniform integer in [0, n). Rejection sampling keeps it unbiased."""
        if n <= 0:
            raise ValueError("bound must be positive")
        if n == 1:
            return 0
        limit = MASK64 + 1 - (MASK64 + 1) % n
        while True:
            x = self.next64()
            if x < limit:
                return x % n

    def choice(self, seq):
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def random(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next64() >> 11) / float(1 << 53)
