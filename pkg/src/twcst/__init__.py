"""Optimal search trees built from two-way comparisons, and related split-tree models."""

from .dp2wcst import Solution, solve, solve_cost_table
from .instances import (
    Gap,
    InfeasibleInstance,
    Instance,
    InstanceError,
    InstanceFormatError,
    Key,
    Op,
    QueryClass,
    Variant,
    canonical_queries,
    normalize_ops,
    parse_instance,
    serialize_instance,
)
from .perturb import PWeight, perturb_instance
from .trees import Leaf, Node, Tree, cost, verify

__version__ = "0.1.0"

__all__ = [
    "Gap", "InfeasibleInstance", "Instance", "InstanceError", "InstanceFormatError", "Key",
    "Leaf", "Node", "Op", "PWeight", "QueryClass", "Solution", "Tree", "Variant",
    "canonical_queries", "cost", "normalize_ops", "parse_instance", "perturb_instance",
    "serialize_instance", "solve", "solve_cost_table", "verify",
]
