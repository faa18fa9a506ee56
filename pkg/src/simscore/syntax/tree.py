"""Rooted ordered syntax trees and the subtree-encoding multiset."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class Node:
    kind: str
    children: list["Node"] = field(default_factory=list)
    text: Optional[str] = None  # leaves only

    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Preorder iteration (source order)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class SyntaxTree:
    root: Node
    fragment_id: str = ""
    has_errors: bool = False
    degenerate: bool = False
    _node_count: Optional[int] = field(default=None, repr=False)

    @property
    def node_count(self) -> int:
        if self._node_count is None:
            self._node_count = sum(1 for _ in self.root.walk())
        return self._node_count


def subtree_multiset(tree: SyntaxTree, max_depth: int = 3) -> Counter:
    """For every node, a canonical encoding of its subtree truncated at
    `max_depth`; the multiset over all nodes. Depth-1 encodings are the bare
    kind label, deeper encodings are nested (kind, children) tuples, so
    multiset size always equals the node count.
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    enc_cache: dict[tuple[int, int], object] = {}

    def enc(node: Node, depth: int):
        key = (id(node), depth)
        got = enc_cache.get(key)
        if got is None:
            if depth <= 1 or node.is_leaf():
                got = node.kind
            else:
                got = (node.kind, tuple(enc(c, depth - 1) for c in node.children))
            enc_cache[key] = got
        return got

    counts: Counter = Counter()
    for node in tree.root.walk():
        counts[enc(node, max_depth)] += 1
    return counts


def truncate_tree(tree: SyntaxTree, max_nodes: int) -> SyntaxTree:
    """Keep the first `max_nodes` nodes in breadth-first order (top structure
    survives); used for the over-cap TSED fallback."""
    if tree.node_count <= max_nodes:
        return tree
    kept: set[int] = set()
    queue: deque[Node] = deque([tree.root])
    while queue and len(kept) < max_nodes:
        node = queue.popleft()
        kept.add(id(node))
        queue.extend(node.children)

    copies: dict[int, Node] = {}
    order: list[Node] = []
    stack = [tree.root]
    while stack:  # preorder copy pass, parents before children
        node = stack.pop()
        if id(node) not in kept:
            continue
        copies[id(node)] = Node(kind=node.kind, text=node.text)
        order.append(node)
        stack.extend(reversed(node.children))
    for node in order:
        copies[id(node)].children = [copies[id(c)] for c in node.children if id(c) in kept]

    return SyntaxTree(
        root=copies[id(tree.root)],
        fragment_id=tree.fragment_id,
        has_errors=tree.has_errors,
        degenerate=True,
    )
