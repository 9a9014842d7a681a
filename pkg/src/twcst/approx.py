"""Entropy, optimal alphabetic trees, and the additive-3 approximation.

The approximation merges each key with the gap to its right (the first key
also takes the leftmost gap), builds an optimal alphabetic tree over those
groups with ``<`` comparisons, then resolves each group with at most two more
comparisons. When only ``<=`` is available the groups pair each key with the gap
to its left instead.
"""

from __future__ import annotations

import gc
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernel
from .dp2wcst import INT64_SAFE
from .instances import Gap, InfeasibleInstance, Instance, InstanceError, Key, Op, QueryClass, realize_cut, to_rational
from .trees import Leaf, Node, Tree, cost


class EqualityOnly(InstanceError):
    """Only equality tests are allowed; use ``equality_chain`` instead."""


@dataclass(frozen=True)
class AlphabeticProblem:
    """Leaf weights whose left-to-right order must be kept."""

    weights: tuple

    def __post_init__(self) -> None:
        weights = tuple(w if type(w) is Fraction else to_rational(w) for w in self.weights)
        if not weights:
            raise ValueError("an alphabetic problem needs at least one leaf")
        if any(w.numerator < 0 for w in weights):
            raise ValueError("leaf weights must be nonnegative")
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)

    def as_instance(self) -> Instance:
        """Keys ``1..m``, successful queries only, ``<`` comparisons only."""
        return Instance.build(self.weights, ops=[Op.LT])

    @cached_property
    def scaled(self) -> tuple[list[int], int]:
        """Integer weights and the common denominator they were scaled by."""
        return _scaled_ints(self.weights)

    def cost(self, depths: Sequence[int]) -> Fraction:
        ints, scale = self.scaled
        return Fraction(sum(map(int.__mul__, ints, map(int, depths))), scale)


def entropy(instance: Instance) -> float:
    """Shannon entropy (bits) of the class distribution; weights must sum to 1."""
    if instance.total_weight() != 1:
        raise ValueError("entropy needs weights summing to 1; normalize the instance first")
    h = 0.0
    for w in list(instance.beta) + list(instance.alpha):
        p = float(w)
        if p > 0:
            h -= p * math.log2(p)
    return h


def _scaled_ints(weights: Sequence) -> tuple[list[int], int]:
    ws = [w if isinstance(w, (int, Fraction)) else to_rational(w) for w in weights]
    scale = math.lcm(*{w.denominator for w in ws})
    if scale == 1:
        return [w.numerator for w in ws], 1
    return [w.numerator * (scale // w.denominator) for w in ws], scale


def alphabetic_depths(weights: Sequence | AlphabeticProblem) -> list[int]:
    """Leaf depths of an optimal alphabetic tree (Garsia-Wachs)."""
    ints = weights.scaled[0] if isinstance(weights, AlphabeticProblem) else _scaled_ints(weights)[0]
    m = len(ints)
    if m == 1:
        return [0]
    nodes = 2 * m - 1
    if _kernel.numba is not None and sum(ints) < INT64_SAFE:
        buf = lambda size: np.zeros(size, dtype=np.int64)  # noqa: E731
        depth = buf(nodes)
        slots = m + 1
        mx = np.full(slots, -1, dtype=np.int64)
        treap = [buf(slots), buf(slots), buf(slots), buf(slots), mx, buf(slots), buf(slots), buf(slots)]
        _kernel.garsia_wachs(np.asarray(ints, dtype=np.int64), *treap, buf(m - 1), buf(m - 1), buf(m), depth)
        return depth[:m].tolist()
    depth = [0] * nodes
    _kernel.garsia_wachs_list(ints, [0] * m, [0] * m, [0] * (m - 1), [0] * (m - 1), [0] * m, depth)
    return depth[:m]


def tree_from_depths(
    depths: Sequence[int],
    boundary: Callable[[int], tuple[Op, int]] | None = None,
    leaf: Callable[[int], Tree] | None = None,
) -> Tree:
    """Alphabetic tree with the given leaf depths (leaves ``0..m-1`` in order).

    ``boundary(j)`` labels the node separating leaves ``< j`` from ``>= j``
    (default ``< K_{j+1}``); ``leaf(i)`` builds leaf ``i`` (default ``Key(i+1)``).
    """
    boundary = boundary or (lambda j: (Op.LT, j + 1))
    leaf = leaf or (lambda i: Leaf(frozenset([Key(i + 1)])))
    m = len(depths)
    buf = lambda size: np.zeros(size, dtype=np.int64)  # noqa: E731
    left, right, split = buf(max(m - 1, 0)), buf(max(m - 1, 0)), buf(max(m - 1, 0))
    ok = _kernel.alphabetic_shape(np.asarray(depths, dtype=np.int64), buf(m), buf(m), buf(m), left, right, split)
    if not ok:
        raise ValueError("depths do not describe a full binary tree")
    # hundreds of thousands of fresh nodes would otherwise trigger repeated full collections
    paused = gc.isenabled()
    gc.disable()
    try:
        built = [leaf(i) for i in range(m)]
        for a, b, j in zip(left.tolist(), right.tolist(), split.tolist()):
            op, key = boundary(j)
            built.append(Node(op, key, built[a], built[b]))
    finally:
        if paused:
            gc.enable()
    return built[-1]


def alphabetic_tree(problem: AlphabeticProblem) -> Tree:
    """Optimal alphabetic tree for ``problem.as_instance()``."""
    return tree_from_depths(alphabetic_depths(problem.weights))


class Approximation(NamedTuple):
    tree: Tree
    cost: Fraction
    reduced: AlphabeticProblem


def _group_resolver(instance: Instance, group: list[QueryClass]) -> Tree:
    """Cheapest tree separating the classes of one group; ties go to the earlier candidate."""
    ops = instance.ops
    n = instance.n
    if len(group) == 1:
        return Leaf(frozenset(group))
    near = {q.index for q in group} | {q.index + 1 for q in group if not q.is_key}
    keys = sorted(k for k in near if 1 <= k <= n)
    candidates = [(op, k) for k in keys for op in (Op.EQ, Op.LT, Op.LE) if op in ops]

    def best(classes: tuple) -> tuple[Fraction, Tree] | None:
        if len(classes) == 1:
            return Fraction(0), Leaf(frozenset(classes))
        found = None
        for op, k in candidates:
            if op is Op.EQ:
                yes = tuple(q for q in classes if q == Key(k))
            else:
                yes = tuple(q for q in classes if q.pos < (2 * k - 1 if op is Op.LT else 2 * k))
            no = tuple(q for q in classes if q not in yes)
            if not yes or not no:
                continue
            a, b = best(yes), best(no)
            if a is None or b is None:
                continue
            v = a[0] + b[0]
            if found is None or v < found[0]:
                found = (v, Node(op, k, a[1], b[1]))
        if found is None:
            return None
        return found[0] + sum(to_rational(instance.weight(q)) for q in classes), found[1]

    result = best(tuple(group))
    if result is None:
        raise InfeasibleInstance("the allowed comparisons cannot separate " + ", ".join(map(repr, group)))
    return result[1]


def _groups(instance: Instance, op: Op) -> list[list[QueryClass]]:
    """Nonempty groups in key order: ``<`` pairs Key(i) with Gap(i), ``<=`` pairs Gap(i-1) with Key(i)."""
    n = instance.n
    present = set(instance.queries)
    out = []
    for i in range(1, n + 1):
        if op is Op.LT:
            members = [Key(i), Gap(i)] if i > 1 else [Gap(0), Key(1), Gap(1)]
        else:
            members = [Gap(i - 1), Key(i)] if i < n else [Gap(n - 1), Key(n), Gap(n)]
        group = [q for q in members if q in present]
        if group:
            out.append(group)
    return out


def approx3(instance: Instance) -> Approximation:
    """Tree within 3 of optimal: alphabetic tree over merged groups, then per-group resolution."""
    if instance.ops == frozenset({Op.EQ}):
        raise EqualityOnly("only equality comparisons are allowed")
    op = Op.LT if Op.LT in instance.ops else Op.LE
    groups = _groups(instance, op)
    weights = [sum((to_rational(instance.weight(q)) for q in g), Fraction(0)) for g in groups]
    reduced = AlphabeticProblem(tuple(weights))
    resolved = [_group_resolver(instance, g) for g in groups]

    def boundary(j: int) -> tuple[Op, int]:
        label = realize_cut(groups[j - 1][-1].pos, groups[j][0].pos, {op}, instance.n)
        assert label is not None
        return label

    tree = tree_from_depths(alphabetic_depths(weights), boundary, lambda i: resolved[i])
    return Approximation(tree, cost(tree, instance), reduced)


def equality_chain(instance: Instance) -> tuple[Tree, Fraction]:
    """Equality tests in decreasing weight order (ties to the higher index); optimal when only ``=`` is allowed."""
    if Op.EQ not in instance.ops:
        raise InstanceError("equality comparisons are not allowed")
    keys = sorted(instance.key_queries(), key=lambda q: (instance.beta[q.index - 1], q.index), reverse=True)
    others = [q for q in instance.queries if not q.is_key]
    if len(others) > 1:
        raise InfeasibleInstance("equality tests alone cannot separate two non-key classes")
    if others:
        tail: Tree = Leaf(frozenset(others))
        tested = keys
    else:
        tail = Leaf(frozenset([keys[-1]]))
        tested = keys[:-1]
    tree = tail
    for q in reversed(tested):
        tree = Node(Op.EQ, q.index, Leaf(frozenset([q])), tree)
    return tree, cost(tree, instance)
