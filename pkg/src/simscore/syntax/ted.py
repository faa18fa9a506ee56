"""Exact ordered tree edit distance over syntax trees (Zhang-Shasha)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._dp import zhang_shasha
from ..errors import CapacityError
from .tree import Node, SyntaxTree

DEFAULT_NODE_CAP = 3000


@dataclass(frozen=True)
class EditCostTable:
    insert: float = 1.0
    delete: float = 1.0
    rename: float = 1.0

    def __post_init__(self):
        if min(self.insert, self.delete, self.rename) < 0:
            raise ValueError("edit costs must be non-negative")


UNIT_COSTS = EditCostTable()


def tree_edit_distance(t1: SyntaxTree, t2: SyntaxTree,
                       costs: EditCostTable = UNIT_COSTS,
                       node_cap: int = DEFAULT_NODE_CAP) -> float:
    """Minimum-cost edit script value under insert/delete/rename.

    Node labels are the kind labels (renaming a node to the same kind is
    free). Raises CapacityError when either tree exceeds `node_cap`; callers
    choose their own fallback (truncation for TSED, token distance for RUBY).
    """
    if t1.node_count > node_cap or t2.node_count > node_cap:
        raise CapacityError(
            f"tree size {max(t1.node_count, t2.node_count)} exceeds node cap {node_cap}"
        )
    interned: dict[str, int] = {}
    lmld1, kr1, lab1 = _annotate(t1.root, interned)
    lmld2, kr2, lab2 = _annotate(t2.root, interned)
    return float(zhang_shasha(lmld1, lmld2, kr1, kr2, lab1, lab2,
                              float(costs.insert), float(costs.delete), float(costs.rename)))


def _annotate(root: Node, interned: dict[str, int]):
    """1-based postorder arrays: leftmost-leaf-descendant indices, keyroots,
    integer labels (interned across both trees)."""
    order: list[Node] = []
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, seen = stack.pop()
        if seen:
            order.append(node)
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    n = len(order)
    postidx = {id(node): i + 1 for i, node in enumerate(order)}
    lmld = np.zeros(n + 1, dtype=np.int64)
    lab = np.zeros(n + 1, dtype=np.int64)
    lml_by_id: dict[int, int] = {}
    keyroot_by_lml: dict[int, int] = {}
    for i, node in enumerate(order, start=1):
        if node.children:
            lml = lml_by_id[id(node.children[0])]
        else:
            lml = i
        lml_by_id[id(node)] = lml
        lmld[i] = lml
        label = interned.setdefault(node.kind, len(interned))
        lab[i] = label
        keyroot_by_lml[lml] = i  # last (largest) postorder index per lml wins
    kr = np.array(sorted(keyroot_by_lml.values()), dtype=np.int64)
    return lmld, kr, lab


__all__ = ["EditCostTable", "UNIT_COSTS", "DEFAULT_NODE_CAP", "tree_edit_distance"]
