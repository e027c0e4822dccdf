"""Random binary control trees that decide which LFSRs a loop iteration enables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .._validation import as_generator
from ..exceptions import InvalidInputError

# Lowest address bit used for branching; bits below are fixed by word alignment.
ADDR_BIT_BASE = 3
ADDR_BIT_POOL = 24
CHILD_PROBABILITY = 0.7


@dataclass(frozen=True)
class TreeNode:
    lfsr_index: int
    addr_bit: int
    left: Optional[int] = None
    right: Optional[int] = None


@dataclass(frozen=True)
class ControlTree:
    """Nodes in preorder; ``left``/``right`` are indices into ``nodes``. Root is node 0."""

    nodes: tuple[TreeNode, ...]

    def __post_init__(self):
        if not self.nodes:
            raise InvalidInputError("a control tree needs at least a root node")

    @property
    def depth(self) -> int:
        def _depth(i):
            node = self.nodes[i]
            kids = [c for c in (node.left, node.right) if c is not None]
            return 1 + max((_depth(c) for c in kids), default=0)

        return _depth(0)

    def __len__(self):
        return len(self.nodes)

    def walk(self, address: int) -> list[int]:
        """Distinct LFSR indices enabled along the path for ``address``, in visit order."""
        enabled = []
        nodes = self.nodes
        i = 0
        while i is not None:
            node = nodes[i]
            if node.lfsr_index not in enabled:
                enabled.append(node.lfsr_index)
            if (address >> node.addr_bit) & 1:
                i = node.left if node.left is not None else node.right
            else:
                i = node.right if node.right is not None else node.left
        return enabled

    def path_distribution(self):
        """Yield ``(probability, path_length, distinct_lfsr_count)`` for each root-to-leaf path.

        Branch bits are taken as fair coins; single-child nodes pass straight through.
        """
        stack = [(0, 1.0, 1, frozenset())]
        while stack:
            i, prob, length, seen = stack.pop()
            node = self.nodes[i]
            seen = seen | {node.lfsr_index}
            kids = [c for c in (node.left, node.right) if c is not None]
            if not kids:
                yield prob, length, len(seen)
                continue
            share = prob / len(kids)
            for c in kids:
                stack.append((c, share, length + 1, seen))

    def max_lfsr_index(self) -> int:
        return max(n.lfsr_index for n in self.nodes)


def gen_control_tree(n: int, m: int, rng=None) -> ControlTree:
    """Random binary tree of depth at most ``n`` over ``m`` LFSRs.

    Every tree level branches on its own address bit (drawn without replacement),
    so bits along any path are distinct. Each non-bottom node keeps each child
    independently with probability ``CHILD_PROBABILITY``.
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidInputError(f"tree depth must be >= 1, got {n!r}")
    if not isinstance(m, int) or m < 1 or m > 255:
        raise InvalidInputError(f"lfsr count must be in [1, 255], got {m!r}")
    rng = as_generator(rng)
    pool = range(ADDR_BIT_BASE, ADDR_BIT_BASE + max(n, ADDR_BIT_POOL))
    level_bits = [int(b) for b in rng.choice(pool, size=n, replace=False)]

    chunk = 256
    lfsr_draws = rng.integers(m, size=chunk).tolist()
    child_draws = (rng.random((chunk, 2)) < CHILD_PROBABILITY).tolist()

    nodes: list[list] = []
    # preorder build: (level, parent index, side)
    stack = [(0, None, 0)]
    while stack:
        level, parent, side = stack.pop()
        idx = len(nodes)
        if idx >= len(lfsr_draws):
            lfsr_draws += rng.integers(m, size=chunk).tolist()
            child_draws += (rng.random((chunk, 2)) < CHILD_PROBABILITY).tolist()
        nodes.append([lfsr_draws[idx], level_bits[level], None, None])
        if parent is not None:
            nodes[parent][2 + side] = idx
        if level + 1 < n:
            has_left, has_right = child_draws[idx]
            if has_right:
                stack.append((level + 1, idx, 1))
            if has_left:
                stack.append((level + 1, idx, 0))
    return ControlTree(tuple(TreeNode(*rec) for rec in nodes))
