"""Diversified integrity-checking programs: generation, wire format and execution."""

from .addresses import AddressList, gen_address_list
from .counting import catalan, count_programs, tree_count
from .interpreter import ExecutionResult, execute
from .lfsr import Lfsr
from .memory import MemoryImage, SyntheticMemory
from .program import (
    CostModel,
    ICProgram,
    assemble_program,
    decode_program,
    deserialize,
    instructions_per_iteration,
    serialize,
)
from .tree import ControlTree, TreeNode, gen_control_tree

__all__ = [
    "AddressList", "gen_address_list", "catalan", "count_programs", "tree_count",
    "ExecutionResult", "execute", "Lfsr", "MemoryImage", "SyntheticMemory", "CostModel", "ICProgram",
    "assemble_program", "decode_program", "deserialize", "instructions_per_iteration",
    "serialize", "ControlTree", "TreeNode", "gen_control_tree",
]
