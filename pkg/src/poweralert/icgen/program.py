"""IC-program assembly, cost model and the binary program blob."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

from .._validation import as_generator
from ..exceptions import (
    BadMagicError,
    BadVersionError,
    FormatError,
    IntegrityError,
    InvalidInputError,
    NotIrreducibleError,
    TruncatedError,
)
from ..gf2 import Gf2Poly, is_irreducible, random_irreducible
from .tree import ControlTree, TreeNode, gen_control_tree

MAGIC = b"ICPG"
VERSION = 1
COMBINER_PAIRWISE_AND = 1
_HEADER = struct.Struct("<4sBHBBBB")
_CRC = struct.Struct("<I")


@dataclass(frozen=True)
class CostModel:
    """Instruction costs per loop iteration."""

    per_node: int = 2
    per_lfsr: int = 3
    loop_overhead: int = 5
    prologue: int = 20


@dataclass(frozen=True)
class ICProgram:
    lfsrs: tuple[Gf2Poly, ...]
    tree: ControlTree
    accumulator_width: int = 64
    word_size: int = 4
    combiner_id: int = COMBINER_PAIRWISE_AND
    cost: CostModel = field(default_factory=CostModel, compare=False)

    def __post_init__(self):
        if not self.lfsrs:
            raise InvalidInputError("a program needs at least one LFSR")
        degrees = {p.degree for p in self.lfsrs}
        if len(degrees) != 1 or None in degrees or min(degrees) < 1:
            raise InvalidInputError(f"all LFSR polynomials must share one degree >= 1, got {degrees}")
        if self.accumulator_width < 8 or self.accumulator_width % 8 or self.accumulator_width > 255:
            raise InvalidInputError(f"accumulator width must be a multiple of 8 in [8, 248], got {self.accumulator_width}")
        if self.word_size not in (4, 8):
            raise InvalidInputError(f"word size must be 4 or 8, got {self.word_size}")
        if self.combiner_id != COMBINER_PAIRWISE_AND:
            raise InvalidInputError(f"unknown combiner id {self.combiner_id}")
        if self.tree.max_lfsr_index() >= len(self.lfsrs):
            raise InvalidInputError("control tree references a missing LFSR")

    @property
    def degree(self) -> int:
        return self.lfsrs[0].degree


def expected_iteration_cost(tree: ControlTree, cost: CostModel = CostModel()) -> float:
    path = enabled = 0.0
    for prob, length, distinct in tree.path_distribution():
        path += prob * length
        enabled += prob * distinct
    return cost.per_node * path + cost.per_lfsr * enabled + cost.loop_overhead


def instructions_per_iteration(program: ICProgram) -> int:
    """Expected instructions per loop iteration over uniformly random address bits, rounded."""
    return int(round(expected_iteration_cost(program.tree, program.cost)))


def assemble_program(d: int, n: int, m: int, k: int = 64, rng=None, *, word_size: int = 4,
                     target_cost: int | None = None, max_depth: int = 24,
                     attempts_per_depth: int = 64) -> ICProgram:
    """Fresh LFSR bank plus control tree.

    With ``target_cost`` set, ``n`` is the starting depth of a sizing search that
    regenerates trees (growing the depth as needed) until the rounded iteration
    cost equals the target.
    """
    for name, v in (("d", d), ("n", n), ("m", m), ("k", k)):
        if not isinstance(v, int) or v < 1:
            raise InvalidInputError(f"{name} must be a positive integer, got {v!r}")
    if k % 8:
        raise InvalidInputError(f"accumulator width k must be a multiple of 8, got {k}")
    rng = as_generator(rng)
    polys = tuple(random_irreducible(d, rng) for _ in range(m))
    if target_cost is None:
        tree = gen_control_tree(n, m, rng)
    else:
        tree = _size_tree(target_cost, n, m, rng, max_depth, attempts_per_depth)
    return ICProgram(polys, tree, k, word_size)


def _size_tree(target, start_depth, m, rng, max_depth, attempts):
    if target < CostModel().per_node + CostModel().per_lfsr + CostModel().loop_overhead:
        raise InvalidInputError(f"target cost {target} is below the single-node minimum")
    for depth in range(start_depth, max_depth + 1):
        for _ in range(attempts):
            tree = gen_control_tree(depth, m, rng)
            if round(expected_iteration_cost(tree)) == target:
                return tree
    raise InvalidInputError(f"no tree with {m} LFSRs reached cost {target} up to depth {max_depth}")


# -- wire format ---------------------------------------------------------------

def serialize(program: ICProgram) -> bytes:
    d = program.degree
    plen = (d + 8) // 8
    out = bytearray(_HEADER.pack(MAGIC, VERSION, d, len(program.lfsrs), program.accumulator_width,
                                 program.word_size, program.combiner_id))
    for p in program.lfsrs:
        out += p.bits.to_bytes(plen, "little")
    nodes = program.tree.nodes
    out += struct.pack("<H", len(nodes))
    for node in nodes:
        flags = (node.left is not None) | ((node.right is not None) << 1)
        out += bytes((node.lfsr_index, node.addr_bit, flags))
    out += _CRC.pack(zlib.crc32(out))
    return bytes(out)


def decode_program(buf: bytes, offset: int = 0, *, strict: bool = False) -> tuple[ICProgram, int]:
    """Parse one program blob starting at ``offset``; return it and the end offset."""
    view = memoryview(buf)
    if len(buf) - offset < _HEADER.size:
        raise TruncatedError("program header truncated", len(buf))
    magic, version, d, m, k, word_size, combiner = _HEADER.unpack_from(view, offset)
    if magic != MAGIC:
        raise BadMagicError(f"bad program magic {bytes(magic)!r}", offset)
    if version != VERSION:
        raise BadVersionError(f"unsupported program version {version}", offset + 4)
    if d < 1 or m < 1:
        raise FormatError("degree and LFSR count must be positive", offset + 5)
    plen = (d + 8) // 8
    pos = offset + _HEADER.size
    polys_end = pos + m * plen
    if len(buf) < polys_end + 2:
        raise TruncatedError("program body truncated", len(buf))
    (count,) = struct.unpack_from("<H", view, polys_end)
    end = polys_end + 2 + 3 * count
    if len(buf) < end + _CRC.size:
        raise TruncatedError("program node table truncated", len(buf))
    (crc,) = _CRC.unpack_from(view, end)
    if crc != zlib.crc32(view[offset:end]):
        raise IntegrityError("program CRC mismatch", end)

    polys = []
    for i in range(m):
        bits = int.from_bytes(view[pos + i * plen: pos + (i + 1) * plen], "little")
        if bits.bit_length() - 1 != d:
            raise FormatError(f"polynomial {i} does not have degree {d}", pos + i * plen)
        p = Gf2Poly(bits)
        if strict and not is_irreducible(p):
            raise NotIrreducibleError(f"polynomial {i} ({p.hex()}) is reducible", pos + i * plen)
        polys.append(p)
    if count == 0:
        raise FormatError("program has an empty control tree", polys_end)
    records = [tuple(view[polys_end + 2 + 3 * i: polys_end + 5 + 3 * i]) for i in range(count)]
    nodes = _rebuild_tree(records, polys_end + 2)
    try:
        program = ICProgram(tuple(polys), ControlTree(nodes), k, word_size, combiner)
    except InvalidInputError as exc:
        raise FormatError(str(exc), offset) from None
    return program, end + _CRC.size


def _rebuild_tree(records, table_offset):
    # preorder: each record fills the most recently opened child slot
    links = [[None, None] for _ in records]
    slots = [(None, 0)]
    for idx, (_, _, flags) in enumerate(records):
        if not slots:
            raise FormatError("node table has unreachable records", table_offset + 3 * idx)
        if flags & ~0b11:
            raise FormatError(f"unknown node flags {flags:#x}", table_offset + 3 * idx + 2)
        parent, side = slots.pop()
        if parent is not None:
            links[parent][side] = idx
        if flags & 2:
            slots.append((idx, 1))
        if flags & 1:
            slots.append((idx, 0))
    if slots:
        raise FormatError("node table ends before the tree does", table_offset + 3 * len(records))
    return tuple(TreeNode(r[0], r[1], left, right) for r, (left, right) in zip(records, links))


def deserialize(blob: bytes, *, strict: bool = False) -> ICProgram:
    program, end = decode_program(blob, 0, strict=strict)
    if end != len(blob):
        raise FormatError(f"{len(blob) - end} trailing bytes after program", end)
    return program
