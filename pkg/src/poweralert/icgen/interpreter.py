"""Deterministic interpreter for IC-programs.

Prover and verifier both run this; the hash depends on the nonce, on every
covered word and on every covered word's address.
"""

from __future__ import annotations

from typing import NamedTuple

from ..exceptions import ExecutionFault
from .addresses import AddressList
from .lfsr import ClockTable
from .memory import MemoryImage
from .program import ICProgram, instructions_per_iteration

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class ExecutionResult(NamedTuple):
    hash: int
    instruction_count: int


def fold(value: int, width: int) -> int:
    """XOR-fold a non-negative integer into ``width`` bits."""
    mask = (1 << width) - 1
    out = 0
    while value:
        out ^= value & mask
        value >>= width
    return out


def seed_registers(program: ICProgram, nonce: int) -> list[int]:
    d_mask = (1 << program.degree) - 1
    regs = []
    for j in range(len(program.lfsrs)):
        r = (nonce ^ ((j + 1) * GOLDEN_GAMMA & _MASK64)) & d_mask
        regs.append(r or 1)
    return regs


def _combine(outputs: list[int]) -> int:
    e = len(outputs)
    if e == 1:
        return outputs[0]
    if e == 2:
        # cyclic pairs (0,1),(1,0) would cancel; use the single pair
        return outputs[0] & outputs[1]
    z = 0
    for i in range(e):
        z ^= outputs[i] & outputs[(i + 1) % e]
    return z


class _Machine:
    """Mutable interpreter state for one execution."""

    def __init__(self, program: ICProgram, nonce: int):
        k = program.accumulator_width
        self.k = k
        self.d = program.degree
        self.mask_k = (1 << k) - 1
        self.tables = [ClockTable(p, k) for p in program.lfsrs]
        self.tree = program.tree
        self.regs = seed_registers(program, nonce)
        self.h = nonce & self.mask_k

    def update(self, address: int, x: int) -> None:
        enabled = self.tree.walk(address)
        regs = self.regs
        outputs = []
        for j in enabled:
            out, regs[j] = self.tables[j].clock(regs[j])
            outputs.append(out)
        z = _combine(outputs)
        k, h = self.k, self.h
        h = ((h << 1) | (h >> (k - 1))) & self.mask_k
        self.h = h ^ z ^ fold(x, k) ^ fold(address, k)
        xd = fold(x, self.d)
        for j in enabled:
            regs[j] = (regs[j] ^ xd) or 1


def execute(program: ICProgram, memory: MemoryImage, addresses: AddressList, nonce: int,
            extra_per_iteration: int = 0) -> ExecutionResult:
    """Run ``program`` over the words named by ``addresses``.

    ``extra_per_iteration`` adds instructions to every loop iteration's count
    (used to model injected attacker code); it does not change the hash.
    Raises ``ExecutionFault`` on any read outside ``memory``.
    """
    lo, hi = memory.bounds
    for base, count in addresses.tuples:
        if base < lo or base + count * addresses.word_size > hi:
            raise ExecutionFault(f"tuple ({base:#x}, {count}) outside memory [{lo:#x}, {hi:#x})")
    vm = _Machine(program, nonce & _MASK64)
    vm.update(0, nonce & _MASK64)
    words = 0
    read = memory.read
    for address, nbytes in addresses.expand():
        vm.update(address, read(address, nbytes))
        words += 1
    per_iter = instructions_per_iteration(program) + extra_per_iteration
    return ExecutionResult(vm.h, words * per_iter + program.cost.prologue)
