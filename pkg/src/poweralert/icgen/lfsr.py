"""Galois-configured linear feedback shift registers."""

from __future__ import annotations

from ..exceptions import InvalidInputError
from ..gf2 import Gf2Poly


class Lfsr:
    """Right-shifting Galois LFSR over the feedback polynomial ``taps``.

    One step: the low bit is the output; the register shifts right and, when the
    output bit was 1, XORs in the tap mask (``taps`` without its constant term).
    With an irreducible ``taps`` this multiplies the state by ``x**-1`` in
    ``GF(2)[x]/taps``, so the period divides ``2**d - 1``.
    """

    def __init__(self, taps: Gf2Poly, seed: int = 1):
        if taps.degree is None or taps.degree < 1:
            raise InvalidInputError("LFSR taps need degree >= 1")
        self.taps = taps
        self.width = taps.degree
        self.mask = taps.bits >> 1
        self.register = seed & ((1 << self.width) - 1) or 1

    def step(self) -> int:
        out = self.register & 1
        self.register >>= 1
        if out:
            self.register ^= self.mask
        return out

    def clock(self, k: int) -> int:
        """Clock ``k`` times, returning the output bits packed LSB-first."""
        out = 0
        for i in range(k):
            out |= self.step() << i
        return out

    def __repr__(self):
        return f"Lfsr(taps={self.taps.hex()}, register={self.register:#x})"


class ClockTable:
    """Byte-sliced lookup for ``k`` clocks of a Galois LFSR.

    Stepping is linear over GF(2), so the pair (k output bits, next state) for
    any register is the XOR of the pairs for each of its bytes.
    """

    __slots__ = ("width", "k", "mask_k", "tables")

    def __init__(self, taps: Gf2Poly, k: int):
        self.width = d = taps.degree
        self.k = k
        self.mask_k = (1 << k) - 1
        # Stepping e_{d-1} shifts through e_{d-2}, ..., e_0 with zero output, so a
        # single trajectory of d-1+k steps holds every basis vector's response.
        reg = Lfsr(taps)
        reg.register = 1 << (d - 1)
        states = [reg.register]
        bits = reg.register & 1
        for u in range(1, d + k):
            reg.step()
            states.append(reg.register)
            bits |= (reg.register & 1) << u
        basis = []
        for i in range(d):
            start = d - 1 - i
            out = (bits >> start) & self.mask_k
            basis.append(out | (states[start + k] << k))
        self.tables = []
        for pos in range(0, d, 8):
            bits = basis[pos:pos + 8]
            table = [0] * (1 << len(bits))
            for v in range(1, len(table)):
                low = v & -v
                table[v] = table[v ^ low] ^ bits[low.bit_length() - 1]
            self.tables.append(table)

    def clock(self, register: int) -> tuple[int, int]:
        acc = 0
        for table in self.tables:
            acc ^= table[register & 0xFF]
            register >>= 8
        return acc & self.mask_k, acc >> self.k
