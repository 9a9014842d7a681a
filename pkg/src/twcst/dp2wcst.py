"""Optimal two-way comparison search trees in O(n^4) time.

Subproblems are ``S(I, h)``: the queries in a key interval ``I`` minus the ``h``
heaviest keys of ``I``. Key weights are perturbed (``beta_j + j*e``) so that
"the h heaviest" is always unique. A subproblem is either a leaf (at most one
class left), an equality test on its heaviest remaining key, or an inequality
test that cuts the interval in two.

Intervals are stored as runs ``[a, b]`` of consecutive query classes; every key
interval ``(k1, k2)``, ``[k1, k2]``, ... maps onto one such run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from . import _kernel
from .instances import InfeasibleInstance, Instance, Op, QueryClass, realize_cut, to_rational
from .perturb import PWeight
from .trees import Leaf, Node, Tree

INT64_SAFE = 1 << 61
NUMBA_MIN_CLASSES = 40


@dataclass(frozen=True)
class KeyInterval:
    """Queries between two endpoints; ``None`` stands for minus/plus infinity."""

    lo: int | None
    hi: int | None
    lo_closed: bool = False
    hi_closed: bool = False


@dataclass(frozen=True)
class SubproblemKey:
    interval: KeyInterval
    h: int


class Solution(NamedTuple):
    tree: Tree
    cost: Fraction


def _query_range(instance: Instance, interval: KeyInterval) -> tuple[int, int]:
    """Indices ``a..b`` into ``instance.queries`` covered by the interval (empty when ``a > b``)."""
    pos = [q.pos for q in instance.queries]
    if interval.lo is None:
        lo_pos = -1
    else:
        kpos = 2 * interval.lo - 1
        lo_pos = kpos - 1 if interval.lo_closed else kpos
    if interval.hi is None:
        hi_pos = 2 * instance.n + 1
    else:
        kpos = 2 * interval.hi - 1
        hi_pos = kpos + 1 if interval.hi_closed else kpos
    idx = [i for i, p in enumerate(pos) if lo_pos < p < hi_pos]
    if not idx:
        return 0, -1
    return idx[0], idx[-1]


def _heaviest_first(instance: Instance) -> list[int]:
    """Query indices of key classes ordered by perturbed weight, heaviest first."""
    entries = [(instance.beta[q.index - 1], q.index, i) for i, q in enumerate(instance.queries) if q.is_key]
    entries.sort(key=lambda e: (e[0], e[1]), reverse=True)
    return [i for _, _, i in entries]


def top_keys(instance: Instance, interval: KeyInterval, h: int) -> list[int]:
    """Key indices of the ``h`` heaviest query keys in the interval, heaviest first."""
    a, b = _query_range(instance, interval)
    inside = [i for i in _heaviest_first(instance) if a <= i <= b]
    if h > len(inside):
        raise ValueError(f"the interval holds only {len(inside)} keys, cannot take {h}")
    return [instance.queries[i].index for i in inside[:h]]


def subproblem_classes(instance: Instance, sub: SubproblemKey) -> list[QueryClass]:
    a, b = _query_range(instance, sub.interval)
    removed = set(top_keys(instance, sub.interval, sub.h)) if a <= b else set()
    if a > b and sub.h:
        raise ValueError("an empty interval has no keys to remove")
    return [q for q in instance.queries[a:b + 1] if not (q.is_key and q.index in removed)]


def weight_of(instance: Instance, sub: SubproblemKey) -> PWeight:
    """Perturbed weight of ``S(I, h)``."""
    total = PWeight()
    for q in subproblem_classes(instance, sub):
        w = instance.weight(q)
        total = total + (PWeight(w, q.index) if q.is_key else PWeight(w, 0))
    return total


class _Prepared:
    """Integer encoding of an instance shared by the interval kernels."""

    def __init__(self, instance: Instance, cut_ops: frozenset):
        self.instance = instance
        qs = instance.queries
        self.m = m = len(qs)
        self.pos = [q.pos for q in qs]
        weights = [to_rational(instance.weight(q)) for q in qs]
        self.scale = math.lcm(*(w.denominator for w in weights)) if weights else 1
        real = [int(w * self.scale) for w in weights]
        eps = [q.index if q.is_key else 0 for q in qs]
        eps_total = sum(eps)
        self.M = eps_total * m + 1
        enc = [r * self.M + e for r, e in zip(real, eps)]
        self.bound = (sum(real) * self.M + eps_total) * max(m, 1)
        self.wpre = [0]
        for v in enc:
            self.wpre.append(self.wpre[-1] + v)
        self.is_key = [1 if q.is_key else 0 for q in qs]
        self.order = _heaviest_first(instance)
        self.cut_label = [realize_cut(self.pos[c], self.pos[c + 1], cut_ops, instance.n) for c in range(m - 1)]
        self.cut_ok = [1 if lab is not None else 0 for lab in self.cut_label]
        self.offset = [0] * (m * m)
        nxt = 0
        key_prefix = [0]
        for v in self.is_key:
            key_prefix.append(key_prefix[-1] + v)
        self.key_prefix = key_prefix
        for a in range(m):
            for b in range(a, m):
                self.offset[a * m + b] = nxt
                nxt += key_prefix[b + 1] - key_prefix[a] + 1
        self.cells = nxt

    def keys_count(self, a: int, b: int) -> int:
        return self.key_prefix[b + 1] - self.key_prefix[a]

    def top(self, a: int, b: int, h: int) -> list[int]:
        """Query indices of the ``h`` heaviest keys in ``[a, b]``."""
        out = []
        for c in self.order:
            if len(out) == h:
                break
            if a <= c <= b:
                out.append(c)
        return out

    def decode(self, v: int) -> PWeight:
        r, e = divmod(v, self.M)
        return PWeight(Fraction(r, self.scale), e)

    def run(self, kernel: str, backend: str = "auto", eq_ok: bool = True) -> tuple[Any, Any, int]:
        use_numba = backend == "numba" or (
            backend == "auto" and self.m >= NUMBA_MIN_CLASSES and self.bound < INT64_SAFE
        )
        if use_numba and self.bound >= INT64_SAFE:
            raise OverflowError("weights too fine-grained for the int64 kernel")
        nk = len(self.order)
        if use_numba and _kernel.numba is not None:
            inf = 1 << 62
            arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
            table = np.zeros(self.cells, dtype=np.int64)
            choice = np.zeros(self.cells, dtype=np.int64)
            args = [self.m, arr(self.wpre), arr(self.order), arr(self.cut_ok)]
            scratch = [np.zeros(max(nk, 1), dtype=np.int64)] + [np.zeros(nk + 1, dtype=np.int64) for _ in range(3)]
            rest = [arr(self.offset), table, choice, *scratch, inf]
            fn = getattr(_kernel, kernel)
        else:
            inf = 2 * self.bound + 1
            table = [0] * self.cells
            choice = [0] * self.cells
            args = [self.m, self.wpre, self.order, self.cut_ok]
            scratch = [[0] * max(nk, 1)] + [[0] * (nk + 1) for _ in range(3)]
            rest = [self.offset, table, choice, *scratch, inf]
            fn = getattr(_kernel, kernel).py_func
        if kernel == "fill_2wcst":
            args.append(bool(eq_ok))
        fn(*args, *rest)
        return table, choice, inf


class DpTable:
    """Memo table of ``opt(S(I, h))`` under the perturbed weights."""

    def __init__(self, prep: _Prepared, table, choice, inf: int):
        self._prep = prep
        self._table = table
        self._choice = choice
        self._inf = inf
        self.instance = prep.instance

    def __len__(self) -> int:
        return self._prep.cells

    def _idx(self, a: int, b: int, h: int) -> int:
        return self._prep.offset[a * self._prep.m + b] + h

    def value(self, a: int, b: int, h: int) -> PWeight | None:
        """Cell for query run ``[a, b]``; ``None`` when infeasible. Empty runs cost zero."""
        if a > b:
            return PWeight()
        if not 0 <= h <= self._prep.keys_count(a, b):
            raise IndexError(f"h={h} out of range for run [{a}, {b}]")
        v = int(self._table[self._idx(a, b, h)])
        return None if v >= self._inf else self._prep.decode(v)

    def __getitem__(self, sub: SubproblemKey) -> PWeight | None:
        a, b = _query_range(self.instance, sub.interval)
        if a > b:
            if sub.h:
                raise IndexError("an empty interval has no keys to remove")
            return PWeight()
        return self.value(a, b, sub.h)

    def cells(self):
        """Yield ``(a, b, h, value)`` for every cell."""
        m = self._prep.m
        for a in range(m):
            for b in range(a, m):
                for h in range(self._prep.keys_count(a, b) + 1):
                    yield a, b, h, self.value(a, b, h)

    def classes(self, a: int, b: int, h: int) -> list[QueryClass]:
        removed = set(self._prep.top(a, b, h))
        return [self.instance.queries[c] for c in range(a, b + 1) if c not in removed]

    def root(self) -> PWeight | None:
        return self.value(0, self._prep.m - 1, 0)

    def tree(self) -> Tree:
        prep = self._prep
        qs = self.instance.queries
        if self.root() is None:
            raise InfeasibleInstance("no tree over the allowed comparisons separates all queries")
        # preorder expansion, then build bottom-up so deep trees never recurse
        order: list[tuple[int, int, int]] = []
        stack = [(0, prep.m - 1, 0)]
        plan: dict[tuple[int, int, int], tuple] = {}
        while stack:
            a, b, h = stack.pop()
            order.append((a, b, h))
            ch = int(self._choice[self._idx(a, b, h)])
            if ch == _kernel.LEAF:
                plan[(a, b, h)] = ("leaf",)
            elif ch == _kernel.EQUAL:
                c = prep.top(a, b, h + 1)[-1]
                plan[(a, b, h)] = ("eq", qs[c], (a, b, h + 1))
                stack.append((a, b, h + 1))
            elif ch >= 0:
                top = prep.top(a, b, h)
                hc = sum(1 for t in top if t <= ch)
                left, right = (a, ch, hc), (ch + 1, b, h - hc)
                plan[(a, b, h)] = ("cut", prep.cut_label[ch], left, right)
                stack.append(right)
                stack.append(left)
            else:
                raise AssertionError("reconstruction reached an infeasible cell")
        built: dict[tuple[int, int, int], Tree] = {}
        for cell in reversed(order):
            step = plan[cell]
            if step[0] == "leaf":
                built[cell] = Leaf(frozenset(self.classes(*cell)))
            elif step[0] == "eq":
                q = step[1]
                built[cell] = Node(Op.EQ, q.index, Leaf(frozenset([q])), built[step[2]])
            else:
                op, key = step[1]
                built[cell] = Node(op, key, built[step[2]], built[step[3]])
        return built[(0, prep.m - 1, 0)]


def solve_cost_table(instance: Instance, backend: str = "auto") -> DpTable:
    inequalities = frozenset(op for op in instance.ops if op is not Op.EQ)
    prep = _Prepared(instance, inequalities)
    table, choice, inf = prep.run("fill_2wcst", backend, eq_ok=Op.EQ in instance.ops)
    return DpTable(prep, table, choice, inf)


def solve_perturbed(instance: Instance, backend: str = "auto") -> tuple[Tree, PWeight]:
    table = solve_cost_table(instance, backend)
    value = table.root()
    if value is None:
        raise InfeasibleInstance("no tree over the allowed comparisons separates all queries")
    return table.tree(), value


def solve(instance: Instance, backend: str = "auto") -> Solution:
    """Minimum-cost tree; the returned cost is exact and refers to the unperturbed weights."""
    tree, value = solve_perturbed(instance, backend)
    return Solution(tree, value.real)
