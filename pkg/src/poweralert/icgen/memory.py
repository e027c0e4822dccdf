"""Byte-addressed memory images (the prover's system state)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ExecutionFault, InvalidInputError


@dataclass(frozen=True)
class MemoryImage:
    """Contiguous bytes covering ``[low, high)``."""

    low: int
    data: bytes

    def __post_init__(self):
        if self.low < 0:
            raise InvalidInputError("memory base address must be non-negative")
        object.__setattr__(self, "data", bytes(self.data))

    @property
    def high(self) -> int:
        return self.low + len(self.data)

    @property
    def bounds(self) -> tuple[int, int]:
        return self.low, self.high

    @classmethod
    def random(cls, low: int, size: int, rng) -> "MemoryImage":
        return cls(low, rng.bytes(size))

    def read(self, address: int, nbytes: int) -> int:
        """Little-endian read of ``nbytes`` starting at ``address``."""
        off = address - self.low
        if off < 0 or off + nbytes > len(self.data):
            raise ExecutionFault(f"read of {nbytes} bytes at {address:#x} outside [{self.low:#x}, {self.high:#x})")
        return int.from_bytes(self.data[off:off + nbytes], "little")

    def patched(self, address: int, payload: bytes) -> "MemoryImage":
        off = address - self.low
        if off < 0 or off + len(payload) > len(self.data):
            raise InvalidInputError(f"patch at {address:#x} does not fit the image")
        buf = bytearray(self.data)
        buf[off:off + len(payload)] = payload
        return MemoryImage(self.low, bytes(buf))

    def diff(self, other: "MemoryImage") -> np.ndarray:
        """Addresses whose bytes differ from ``other`` (the compromised set against a golden image)."""
        if self.bounds != other.bounds:
            raise InvalidInputError("images cover different ranges")
        a = np.frombuffer(self.data, dtype=np.uint8)
        b = np.frombuffer(other.data, dtype=np.uint8)
        return np.flatnonzero(a != b) + self.low


_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SyntheticMemory:
    """Pseudo-random content over ``[low, low + size)`` computed on demand.

    Each aligned 8-byte block is a hash of (seed, block index), so large regions
    cost no storage. ``overrides`` maps addresses to patched byte values.
    """

    low: int
    size: int
    seed: int = 0
    overrides: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.low < 0 or self.size <= 0:
            raise InvalidInputError("synthetic memory needs a non-negative base and positive size")
        object.__setattr__(self, "_patch", dict(self.overrides))

    @property
    def high(self) -> int:
        return self.low + self.size

    @property
    def bounds(self) -> tuple[int, int]:
        return self.low, self.high

    def byte(self, address: int) -> int:
        if address in self._patch:
            return self._patch[address]
        return (_splitmix64(self.seed ^ (address >> 3)) >> (8 * (address & 7))) & 0xFF

    def read(self, address: int, nbytes: int) -> int:
        if address < self.low or address + nbytes > self.high:
            raise ExecutionFault(f"read of {nbytes} bytes at {address:#x} outside [{self.low:#x}, {self.high:#x})")
        patch = self._patch
        touched = patch and any(a in patch for a in range(address, address + nbytes))
        if (address & 7) + nbytes <= 8 and not touched:
            block = _splitmix64(self.seed ^ (address >> 3)) >> (8 * (address & 7))
            return block & ((1 << (8 * nbytes)) - 1)
        return int.from_bytes(bytes(self.byte(address + i) for i in range(nbytes)), "little")

    def patched(self, address: int, payload: bytes) -> "SyntheticMemory":
        if address < self.low or address + len(payload) > self.high:
            raise InvalidInputError(f"patch at {address:#x} does not fit the image")
        patch = dict(self._patch)
        patch.update((address + i, b) for i, b in enumerate(payload))
        return SyntheticMemory(self.low, self.size, self.seed, tuple(sorted(patch.items())))

    def diff(self, other: "SyntheticMemory") -> np.ndarray:
        """Addresses where the two images differ (only patched bytes can differ)."""
        if self.bounds != other.bounds or self.seed != other.seed:
            raise InvalidInputError("images are not comparable")
        keys = set(self._patch) | set(other._patch)
        return np.array(sorted(a for a in keys if self.byte(a) != other.byte(a)), dtype=np.uint64)
