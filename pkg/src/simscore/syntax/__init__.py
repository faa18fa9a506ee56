"""Syntax-tree machinery: parsing, subtree multisets, data flow, tree edit distance."""

from .dataflow import DataFlowGraph, dataflow_graph
from .parser import parse
from .ted import DEFAULT_NODE_CAP, EditCostTable, UNIT_COSTS, tree_edit_distance
from .tree import Node, SyntaxTree, subtree_multiset, truncate_tree

__all__ = [
    "DataFlowGraph",
    "DEFAULT_NODE_CAP",
    "EditCostTable",
    "Node",
    "SyntaxTree",
    "UNIT_COSTS",
    "dataflow_graph",
    "parse",
    "subtree_multiset",
    "tree_edit_distance",
    "truncate_tree",
]
