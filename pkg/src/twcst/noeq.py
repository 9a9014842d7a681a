"""Exact solver when equality tests are not allowed.

Without ``=`` every node splits the ordered query classes into a prefix and a
suffix, so an optimal tree is an optimal alphabetic tree over the class weights
with each boundary relabelled by an allowed inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .approx import AlphabeticProblem, alphabetic_depths, tree_from_depths
from .instances import InfeasibleInstance, Instance, InstanceError, Key, Op, QueryClass, realize_cut, threshold
from .trees import Leaf, Node, Tree, TreeError, verify


class NoCorrectTree(InfeasibleInstance):
    """Two adjacent query classes cannot be told apart by any allowed inequality."""


@dataclass(frozen=True)
class Reduction:
    """Alphabetic problem over the query classes, plus the classes themselves (leaf ``j`` is ``classes[j]``)."""

    problem: AlphabeticProblem
    classes: tuple
    labels: tuple

    def boundary(self, j: int) -> tuple[Op, int]:
        """Allowed inequality separating leaves ``< j`` from ``>= j`` (0-based leaf indices)."""
        return self.labels[j - 1]


def _boundary_labels(instance: Instance) -> tuple:
    # a key on the right is cut just below it with "<"; a gap just above the key before it with "<="
    lt, le = Op.LT in instance.ops, Op.LE in instance.ops
    pos = [q.pos for q in instance.queries]
    labels = []
    for left, right in zip(pos, pos[1:]):
        if right % 2 and lt:
            labels.append((Op.LT, (right + 1) // 2))
        elif not right % 2 and le and right >= 2:
            labels.append((Op.LE, right // 2))
        else:
            label = realize_cut(left, right, instance.ops, instance.n)
            if label is None:
                raise NoCorrectTree(f"no allowed inequality separates {QueryClass(left)!r} from {QueryClass(right)!r}")
            labels.append(label)
    return tuple(labels)


class Solution(NamedTuple):
    tree: Tree
    cost: Fraction


def reduce_noeq(instance: Instance) -> Reduction:
    if Op.EQ in instance.ops:
        raise InstanceError("the reduction applies only when equality tests are not allowed")
    classes = instance.queries
    return Reduction(AlphabeticProblem(tuple(instance.query_weights())), classes, _boundary_labels(instance))


def _relabel(tree: Tree, node_map, leaf_map) -> Tree:
    """Rebuild ``tree`` bottom-up without recursion."""
    order: list[Tree] = []
    stack = [tree]
    while stack:
        t = stack.pop()
        order.append(t)
        if isinstance(t, Node):
            stack.append(t.no)
            stack.append(t.yes)
    built: dict[int, Tree] = {}
    for t in reversed(order):
        if isinstance(t, Leaf):
            built[id(t)] = leaf_map(t)
        else:
            op, key = node_map(t)
            built[id(t)] = Node(op, key, built[id(t.yes)], built[id(t.no)])
    return built[id(tree)]


def lift_tree(reduced_tree: Tree, reduction: Reduction) -> Tree:
    """Map a tree for the reduced problem back to the original instance, node by node."""
    m = len(reduction.classes)

    def node_map(t: Node) -> tuple[Op, int]:
        if t.op is not Op.LT or not 2 <= t.key <= m:
            raise TreeError(f"node ({t.op} K{t.key}) does not split the reduced queries")
        return reduction.boundary(t.key - 1)

    def leaf_map(t: Leaf) -> Leaf:
        return Leaf(frozenset(reduction.classes[q.index - 1] for q in t.classes))

    return _relabel(reduced_tree, node_map, leaf_map)


def project_tree(tree: Tree, reduction: Reduction) -> Tree:
    """Forward mapping: a ``<=``/``<`` tree for the instance becomes a ``<`` tree for the reduction."""
    positions = [q.pos for q in reduction.classes]
    index = {q: j for j, q in enumerate(reduction.classes, 1)}

    def node_map(t: Node) -> tuple[Op, int]:
        if t.op is Op.EQ:
            raise TreeError("equality tests have no counterpart in the reduced problem")
        cut = threshold(t.op, t.key)
        # least query class at or above the threshold
        for j, p in enumerate(positions, 1):
            if p >= cut:
                return Op.LT, j
        raise TreeError(f"node ({t.op} K{t.key}) sends every query to its yes side")

    def leaf_map(t: Leaf) -> Leaf:
        return Leaf(frozenset(Key(index[q]) for q in t.classes))

    return _relabel(tree, node_map, leaf_map)


def solve_noeq(instance: Instance, check: bool = False) -> Solution:
    """Optimal tree using only ``<``/``<=``; the cost is exact."""
    reduction = reduce_noeq(instance)
    depths = alphabetic_depths(reduction.problem)
    classes, labels = reduction.classes, reduction.labels
    tree = tree_from_depths(depths, lambda j: labels[j - 1], lambda i: Leaf(frozenset((classes[i],))))
    if check:
        report = verify(tree, instance)
        if not report.ok:
            raise AssertionError("lifted tree failed verification: " + "; ".join(report.problems))
    return Solution(tree, reduction.problem.cost(depths))

