"""Small shared helpers: canonical JSON, content digests, a portable PRNG."""
from __future__ import annotations

import hashlib
import json
import math


def ceil_exact(value: float) -> int:
    # guard against float artifacts: ceil(0.8 * 10) must be 8, not 9
    return math.ceil(round(value, 9))


def canonical_json(obj: object) -> str:
    """Serialize to JSON with sorted keys and no whitespace.

    Used wherever a byte-stable representation feeds a digest; two equal
    values must always produce identical strings.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def digest_of(obj: object) -> str:
    """Content digest of an arbitrary JSON-representable value."""
    return sha256_hex(canonical_json(obj))


_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny portable PRNG (splitmix64).

    Fully specified by its recurrence, so a given seed yields the same
    stream on every platform and interpreter version.  Used where
    reproducibility is part of the contract (seeded trace shuffles),
    not for statistical heavy lifting.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection; bound must be positive."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 - (_MASK64 % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
