"""Deterministic hashing and pseudo-random primitives.

Python's built-in hash() is salted per process, so token hashing and
negative sampling are built on FNV-1a (64-bit) and SplitMix64 instead.
Both are fully pinned here so that any reimplementation (tests, other
languages) can reproduce the exact same streams bit for bit.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_M1 = 0xBF58476D1CE4E5B9
_SPLITMIX_M2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & MASK64
    return h


class SplitMix64:
    """SplitMix64 generator; state advances by the golden-ratio gamma."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _SPLITMIX_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _SPLITMIX_M1) & MASK64
        z = ((z ^ (z >> 27)) * _SPLITMIX_M2) & MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) / 2**53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        limit = (2**64 // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def sample_without_replacement(self, population: list, k: int) -> list:
        """k distinct elements drawn uniformly, in draw order.

        Partial Fisher-Yates over a copy; the input list is not modified.
        """
        if k > len(population):
            raise ValueError(
                f"cannot draw {k} items from population of {len(population)}"
            )
        pool = list(population)
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
