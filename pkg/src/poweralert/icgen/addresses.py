"""Random selection of the address tuples an IC-program reads."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._validation import as_generator
from ..exceptions import InvalidCoverageError, InvalidInputError
from ..gf2 import Gf2Poly
from .lfsr import Lfsr

# x^64 + x^4 + x^3 + x + 1, a primitive pentanomial
SELECTOR_TAPS = Gf2Poly.from_exponents(64, 4, 3, 1, 0)
MAX_WORDS_PER_TUPLE = 8


@dataclass(frozen=True)
class AddressList:
    """Ordered ``(base, words)`` tuples reading ``total_bytes`` bytes from ``bounds``.

    Every word is ``word_size`` bytes except possibly the very last one, which is
    truncated so the byte total is exactly ``total_bytes``.
    """

    tuples: tuple[tuple[int, int], ...]
    total_bytes: int
    bounds: tuple[int, int]
    word_size: int = 4

    def __post_init__(self):
        lo, hi = self.bounds
        if hi <= lo:
            raise InvalidInputError(f"empty address range {self.bounds}")
        words = self.word_count
        if not (words - 1) * self.word_size < self.total_bytes <= words * self.word_size:
            raise InvalidInputError(
                f"{words} words of {self.word_size} bytes cannot carry {self.total_bytes} bytes"
            )
        for base, count in self.tuples:
            if count < 1 or base < lo or base + count * self.word_size > hi:
                raise InvalidInputError(f"tuple ({base:#x}, {count}) leaves {self.bounds}")

    @property
    def word_count(self) -> int:
        return sum(c for _, c in self.tuples)

    @property
    def coverage(self) -> float:
        lo, hi = self.bounds
        return self.total_bytes / (hi - lo)

    def expand(self):
        """Yield ``(address, nbytes)`` for every word read, in order."""
        remaining = self.total_bytes
        for base, count in self.tuples:
            for w in range(count):
                n = min(self.word_size, remaining)
                yield base + w * self.word_size, n
                remaining -= n

    def covered(self) -> np.ndarray:
        """Sorted unique byte addresses touched by the expanded list."""
        parts = [np.arange(a, a + n, dtype=np.uint64) for a, n in self.expand()]
        return np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.uint64)

    def permuted(self, order) -> "AddressList":
        return AddressList(tuple(self.tuples[i] for i in order), self.total_bytes, self.bounds, self.word_size)


def gen_address_list(N: int, bounds: tuple[int, int], word_size: int = 4, rng=None) -> AddressList:
    """Draw tuples from a dedicated selection LFSR until ``N`` bytes are covered.

    Each 64-bit selector output gives the word count (low 3 bits, uniform on 1..8)
    and an aligned base (remaining bits, reduced so the tuple fits the range).
    Tuples may overlap.
    """
    lo, hi = bounds
    if word_size not in (4, 8):
        raise InvalidInputError(f"word size must be 4 or 8, got {word_size}")
    region = hi - lo
    if region <= 0:
        raise InvalidInputError(f"empty address range {bounds}")
    if N < word_size or N > region:
        raise InvalidCoverageError(f"N={N} must lie in [{word_size}, {region}] for this range")
    rng = as_generator(rng)
    seed = int.from_bytes(rng.bytes(8), "little")
    selector = Lfsr(SELECTOR_TAPS, seed)
    slots_total = region // word_size

    tuples = []
    remaining = N
    while remaining > 0:
        draw = selector.clock(64)
        words = 1 + (draw & (MAX_WORDS_PER_TUPLE - 1))
        words = min(words, -(-remaining // word_size), slots_total)
        slots = slots_total - words + 1
        base = lo + ((draw >> 3) % slots) * word_size
        tuples.append((base, words))
        remaining -= min(words * word_size, remaining)
    return AddressList(tuple(tuples), N, (lo, hi), word_size)
