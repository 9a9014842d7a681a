"""Exponential-time exact references.

These evaluate the recurrences over arbitrary query subsets (bitmasks over
``instance.queries``), with no interval structure, no perturbation and no
restriction on which key an equality test may use. They exist only to check the
polynomial solvers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Sequence

from .instances import InfeasibleInstance, Instance, Op, passes
from .trees import Leaf, Node, Tree

MAX_KEYS = 12


class OracleLimit(ValueError):
    """The instance is too large for exhaustive search."""


def _check_size(instance: Instance, limit: int) -> None:
    if instance.n > limit:
        raise OracleLimit(f"exhaustive search is capped at {limit} keys, got {instance.n}")


class _Masks:
    def __init__(self, instance: Instance):
        self.instance = instance
        self.qs = instance.queries
        self.m = len(self.qs)
        self.full = (1 << self.m) - 1
        self.w = [Fraction(instance.weight(q)) for q in self.qs]
        self.key_bit = {q.index: 1 << i for i, q in enumerate(self.qs) if q.is_key}
        ineqs = [op for op in (Op.LT, Op.LE) if op in instance.ops]
        self.cuts = []
        for k in range(1, instance.n + 1):
            for op in ineqs:
                yes = sum(1 << i for i, q in enumerate(self.qs) if passes(q.pos, op, k))
                if 0 < yes < self.full:
                    self.cuts.append((op, k, yes))

    def weight(self, mask: int) -> Fraction:
        total = Fraction(0)
        i = 0
        while mask:
            if mask & 1:
                total += self.w[i]
            mask >>= 1
            i += 1
        return total

    def classes(self, mask: int) -> frozenset:
        return frozenset(q for i, q in enumerate(self.qs) if mask >> i & 1)


def brute_opt_set(instance: Instance, classes=None) -> Fraction | None:
    """Optimal cost of a tree separating ``classes`` (default: all queries); ``None`` if impossible."""
    _check_size(instance, MAX_KEYS)
    masks = _Masks(instance)
    if classes is None:
        mask = masks.full
    else:
        wanted = set(classes)
        mask = sum(1 << i for i, q in enumerate(masks.qs) if q in wanted)
    return _solve_2wcst(masks, mask)[0]


def _solve_2wcst(masks: _Masks, root: int):
    memo: dict[int, tuple] = {}
    eq_ok = Op.EQ in masks.instance.ops

    def opt(mask: int):
        hit = memo.get(mask)
        if hit is not None:
            return hit
        if mask & (mask - 1) == 0:
            memo[mask] = (Fraction(0), None)
            return memo[mask]
        best, how = None, None
        if eq_ok:
            for k, bit in masks.key_bit.items():
                if mask & bit:
                    sub = opt(mask & ~bit)[0]
                    if sub is not None and (best is None or sub < best):
                        best, how = sub, (Op.EQ, k, bit)
        for op, k, yes in masks.cuts:
            y, n = mask & yes, mask & ~yes
            if y and n:
                a, b = opt(y)[0], opt(n)[0]
                if a is not None and b is not None and (best is None or a + b < best):
                    best, how = a + b, (op, k, yes)
        value = None if best is None else masks.weight(mask) + best
        memo[mask] = (value, how)
        return memo[mask]

    value = opt(root)[0]
    return value, memo


def brute_2wcst(instance: Instance) -> tuple[Tree, Fraction]:
    """Exact optimum over every tree whose comparisons are in the allowed set."""
    _check_size(instance, MAX_KEYS)
    masks = _Masks(instance)
    value, memo = _solve_2wcst(masks, masks.full)
    if value is None:
        raise InfeasibleInstance("no tree over the allowed comparisons separates all queries")

    def build(mask: int) -> Tree:
        _, how = memo[mask]
        if how is None:
            return Leaf(masks.classes(mask))
        op, k, bits = how
        if op is Op.EQ:
            return Node(op, k, Leaf(masks.classes(bits)), build(mask & ~bits))
        return Node(op, k, build(mask & bits), build(mask & ~bits))

    return build(masks.full), value


def _split_like(instance: Instance, max_likelihood: bool) -> Fraction:
    """Optimal split tree (equality key must be a heaviest remaining key) or GBST (any key)."""
    _check_size(instance, MAX_KEYS)
    masks = _Masks(instance)
    beta = instance.beta
    n = instance.n
    # split key s sends positions below 2s-1 left; s = n+1 sends everything left
    lefts = []
    for s in range(1, n + 2):
        bits = 0
        for i, q in enumerate(masks.qs):
            if q.pos < 2 * s - 1:
                bits |= 1 << i
        lefts.append(bits)
    memo: dict[int, Fraction | None] = {0: Fraction(0)}

    def opt(mask: int) -> Fraction | None:
        if mask in memo:
            return memo[mask]
        keys = [k for k, bit in masks.key_bit.items() if mask & bit]
        if not keys:
            memo[mask] = Fraction(0) if mask & (mask - 1) == 0 else None
            return memo[mask]
        if max_likelihood:
            top = max(beta[k - 1] for k in keys)
            keys = [k for k in keys if beta[k - 1] == top]
        best = None
        for e in keys:
            rest = mask & ~masks.key_bit[e]
            for left in lefts:
                a = opt(rest & left)
                if a is None:
                    continue
                b = opt(rest & ~left)
                if b is not None and (best is None or a + b < best):
                    best = a + b
        memo[mask] = None if best is None else masks.weight(mask) + best
        return memo[mask]

    value = opt(masks.full)
    if value is None:
        raise InfeasibleInstance("no split tree separates all queries")
    return value


def brute_split(instance: Instance) -> Fraction:
    return _split_like(instance, max_likelihood=True)


def brute_gbst(beta: Instance | Sequence) -> Fraction:
    """Optimal generalized split tree; a bare weight list means successful queries only."""
    instance = beta if isinstance(beta, Instance) else Instance.build(list(beta))
    return _split_like(instance, max_likelihood=False)


def enumerate_trees(instance: Instance, limit: int = 4) -> Iterator[Tree]:
    """Every correct irreducible tree, listed literally (no cost reasoning)."""
    _check_size(instance, limit)
    masks = _Masks(instance)
    eq_ok = Op.EQ in instance.ops
    cache: dict[int, list] = {}

    def trees(mask: int) -> list:
        if mask in cache:
            return cache[mask]
        if mask & (mask - 1) == 0:
            cache[mask] = [Leaf(masks.classes(mask))]
            return cache[mask]
        out = []
        if eq_ok:
            for k, bit in masks.key_bit.items():
                if mask & bit:
                    hit = Leaf(masks.classes(bit))
                    out.extend(Node(Op.EQ, k, hit, t) for t in trees(mask & ~bit))
        for op, k, yes in masks.cuts:
            y, n = mask & yes, mask & ~yes
            if y and n:
                ys, ns = trees(y), trees(n)
                out.extend(Node(op, k, a, b) for a in ys for b in ns)
        cache[mask] = out
        return out

    return iter(trees(masks.full))


def count_trees(instance: Instance, limit: int = 6) -> int:
    _check_size(instance, limit)
    masks = _Masks(instance)
    eq_ok = Op.EQ in instance.ops
    memo: dict[int, int] = {}

    def count(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        if mask & (mask - 1) == 0:
            return 1
        total = 0
        if eq_ok:
            total += sum(count(mask & ~bit) for bit in masks.key_bit.values() if mask & bit)
        for _, _, yes in masks.cuts:
            y, n = mask & yes, mask & ~yes
            if y and n:
                total += count(y) * count(n)
        memo[mask] = total
        return total

    return count(masks.full)
