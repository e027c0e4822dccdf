"""Polynomials over GF(2), the Ben-Or irreducibility test and irreducible counting.

A polynomial is stored as a Python ``int`` whose bit ``i`` is the coefficient of
``x**i`` (least significant bit = constant term), so ``0b111`` is ``x^2 + x + 1``.
Arithmetic is carry-free: addition is XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ._validation import as_generator
from .exceptions import InvalidInputError, InvalidModulusError

__all__ = [
    "Gf2Poly",
    "poly_mul_mod",
    "poly_mod",
    "frobenius_power",
    "poly_gcd",
    "is_irreducible",
    "random_irreducible",
    "count_irreducible",
    "mobius",
]

# bit-spreading table for squaring: abcd -> a0b0c0d
_SPREAD = [sum(((b >> i) & 1) << (2 * i) for i in range(8)) for b in range(256)]


@dataclass(frozen=True, order=True)
class Gf2Poly:
    """Immutable polynomial over GF(2)."""

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < 0:
            raise InvalidInputError(f"polynomial bits must be a non-negative int, got {self.bits!r}")

    @classmethod
    def from_exponents(cls, *exponents: int) -> "Gf2Poly":
        bits = 0
        for e in exponents:
            bits ^= 1 << e
        return cls(bits)

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    @property
    def degree(self) -> int | None:
        """Index of the highest set bit; ``None`` for the zero polynomial."""
        return self.bits.bit_length() - 1 if self.bits else None

    def exponents(self) -> list[int]:
        return [i for i in range(self.bits.bit_length()) if (self.bits >> i) & 1]

    def __int__(self):
        return self.bits

    def __add__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(_clmul(self.bits, other.bits))

    def __mod__(self, other: "Gf2Poly") -> "Gf2Poly":
        if other.is_zero:
            raise ZeroDivisionError("reduction modulo the zero polynomial")
        return Gf2Poly(_mod(self.bits, other.bits))

    def __str__(self):
        if not self.bits:
            return "0"
        terms = []
        for e in reversed(self.exponents()):
            terms.append("1" if e == 0 else "x" if e == 1 else f"x^{e}")
        return " + ".join(terms)

    def hex(self) -> str:
        return f"0x{self.bits:x}"


def _as_bits(p) -> int:
    return p.bits if isinstance(p, Gf2Poly) else int(p)


def _clmul(a: int, b: int) -> int:
    if a < b:
        a, b = b, a
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _square(a: int) -> int:
    r = 0
    shift = 0
    while a:
        r |= _SPREAD[a & 0xFF] << shift
        a >>= 8
        shift += 16
    return r


def _mod(a: int, p: int) -> int:
    dp = p.bit_length() - 1
    da = a.bit_length() - 1
    while da >= dp:
        a ^= p << (da - dp)
        da = a.bit_length() - 1
    return a


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _mod(a, b)
    return a


def _check_modulus(p: int) -> None:
    if p < 2:
        raise InvalidModulusError(f"modulus must have degree >= 1, got {Gf2Poly(p)}")


def poly_mod(a, p) -> Gf2Poly:
    p = _as_bits(p)
    _check_modulus(p)
    return Gf2Poly(_mod(_as_bits(a), p))


def poly_mul_mod(a, b, p) -> Gf2Poly:
    """Return ``a*b mod p``."""
    p = _as_bits(p)
    _check_modulus(p)
    return Gf2Poly(_mod(_clmul(_as_bits(a), _as_bits(b)), p))


def frobenius_power(p, i: int) -> Gf2Poly:
    """``x**(2**i) mod p`` by ``i`` successive squarings."""
    p = _as_bits(p)
    _check_modulus(p)
    if i < 0:
        raise InvalidInputError(f"i must be >= 0, got {i}")
    h = _mod(0b10, p)
    for _ in range(i):
        h = _mod(_square(h), p)
    return Gf2Poly(h)


def poly_gcd(a, b) -> Gf2Poly:
    """Greatest common divisor by Euclid's algorithm (always monic over GF(2))."""
    a, b = _as_bits(a), _as_bits(b)
    if a == 0 and b == 0:
        raise InvalidInputError("gcd(0, 0) is undefined")
    return Gf2Poly(_gcd(a, b))


def _ben_or(p: int) -> bool:
    n = p.bit_length() - 1
    h = 0b10  # x
    for _ in range(n // 2):
        h = _mod(_square(h), p)
        if _gcd(p, h ^ 0b10) != 1:
            return False
    return True


def is_irreducible(p) -> bool:
    """Ben-Or test: ``gcd(p, x^(2^i) - x mod p) == 1`` for every ``i <= deg(p)/2``."""
    p = _as_bits(p)
    if p < 2:
        raise InvalidInputError(f"irreducibility is undefined for constant polynomial {Gf2Poly(p)}")
    return _ben_or(p)


def random_irreducible(d: int, rng=None) -> Gf2Poly:
    """Draw uniformly random degree-``d`` polynomials until one is irreducible.

    Candidates always have the ``x**d`` term set, so the result has degree
    exactly ``d``. The result is a pure function of ``(d, seed)``.
    """
    if not isinstance(d, int) or d < 1:
        raise InvalidInputError(f"degree must be a positive integer, got {d!r}")
    rng = as_generator(rng)
    nbytes = (d + 7) // 8
    mask = (1 << d) - 1
    top = 1 << d
    while True:
        low = int.from_bytes(rng.bytes(nbytes), "little") & mask
        cand = top | low
        # constant term zero means x divides it (only x itself survives)
        if d > 1 and not (cand & 1):
            continue
        if _ben_or(cand):
            return Gf2Poly(cand)


@lru_cache(maxsize=None)
def mobius(n: int) -> int:
    if n < 1:
        raise InvalidInputError(f"mobius is defined for n >= 1, got {n}")
    result = 1
    k = 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            result = -result
        k += 1
    if n > 1:
        result = -result
    return result


def count_irreducible(d: int) -> int:
    """Number of irreducible degree-``d`` polynomials over GF(2) (necklace polynomial at 2).

    Uses ``(1/d) * sum_{k | d} mu(k) * 2**(d/k)`` in exact integer arithmetic.
    """
    if not isinstance(d, int) or d < 1:
        raise InvalidInputError(f"degree must be a positive integer, got {d!r}")
    total = sum(mobius(k) << (d // k) for k in range(1, d + 1) if d % k == 0)
    q, r = divmod(total, d)
    assert r == 0
    return q
