import math
import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _gen
from twcst.approx import (
    AlphabeticProblem,
    EqualityOnly,
    alphabetic_depths,
    alphabetic_tree,
    approx3,
    entropy,
    equality_chain,
    tree_from_depths,
)
from twcst.dp2wcst import solve
from twcst.instances import Gap, InfeasibleInstance, Instance, Key, Op
from twcst.oracle import brute_2wcst
from twcst.trees import cost, verify


def shape_minimum(weights) -> Fraction:
    """Cheapest alphabetic tree by trying every root split."""
    w = [Fraction(x) for x in weights]

    @lru_cache(maxsize=None)
    def best(i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        return sum(w[i:j + 1]) + min(best(i, k) + best(k + 1, j) for k in range(i, j))

    return best(0, len(w) - 1)


def test_entropy_examples():
    assert entropy(Instance.build([Fraction(1, 4)] * 4)) == pytest.approx(2.0)
    assert entropy(Instance.build([1, 0, 0])) == 0.0
    inst = Instance.build([Fraction(1, 2), Fraction(1, 4)], alpha=[Fraction(1, 4), 0, 0])
    assert entropy(inst) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        entropy(Instance.build([1, 1]))


def test_alphabetic_examples():
    assert alphabetic_depths([1, 1]) == [1, 1]
    assert AlphabeticProblem((1, 1)).cost([1, 1]) == 2
    assert alphabetic_depths([1, 1, 1, 1]) == [2, 2, 2, 2]
    assert AlphabeticProblem((1, 1, 1, 1)).cost([2, 2, 2, 2]) == 8
    weights = (8, 1, 1, 8)
    assert AlphabeticProblem(weights).cost(alphabetic_depths(weights)) == shape_minimum(weights)
    assert alphabetic_depths([5]) == [0]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=20, max_denominator=6), min_size=1, max_size=10))
def test_garsia_wachs_is_optimal(weights):
    problem = AlphabeticProblem(tuple(weights))
    depths = alphabetic_depths(weights)
    assert problem.cost(depths) == shape_minimum(weights)
    tree = alphabetic_tree(problem)
    assert cost(tree, problem.as_instance()) == problem.cost(depths)


def test_huge_sum_uses_exact_integers():
    weights = [Fraction(1, 3**40)] + [Fraction(10**15)] * 5
    depths = alphabetic_depths(weights)
    assert AlphabeticProblem(tuple(weights)).cost(depths) == shape_minimum(weights)


def test_tree_from_depths_rejects_bad_depths():
    with pytest.raises(ValueError):
        tree_from_depths([1, 2])


def test_approx_smallest_case():
    third = Fraction(1, 3)
    inst = Instance.build([third], alpha=[third, third], ops=["<", "="])
    result = approx3(inst)
    assert verify(result.tree, inst).ok
    assert result.cost <= solve(inst).cost + 3


def test_approx_uniform_sixteen_keys():
    inst = Instance.build([Fraction(1, 16)] * 16, ops=["<"])
    assert entropy(inst) == pytest.approx(4.0)
    assert approx3(inst).cost <= 6


def test_equality_only_is_rejected_then_chained():
    inst = Instance.build([2, 1, 3], ops=["="])
    with pytest.raises(EqualityOnly):
        approx3(inst)
    tree, value = equality_chain(inst)
    assert value == brute_2wcst(inst)[1]
    assert tree.key == 3
    with_gap = Instance.build([2, 1], alpha=[0, 0, 5], ops=["="], queries=[Key(1), Key(2), Gap(2)])
    assert equality_chain(with_gap)[1] == brute_2wcst(with_gap)[1]
    with pytest.raises(InfeasibleInstance):
        equality_chain(Instance.build([1], alpha=[1, 1], ops=["="]))


@pytest.mark.parametrize("ops", [s for s in _gen.OP_SUBSETS if s != {Op.EQ}])
def test_approx_within_three(ops):
    rng = random.Random(len(ops) * 31 + sum(map(len, map(str, ops))))
    for _ in range(15):
        inst = _gen.instance(rng, rng.randint(1, 40), ops=ops, ties=rng.random() < 0.5)
        try:
            best = solve(inst).cost
        except InfeasibleInstance:
            with pytest.raises(InfeasibleInstance):
                approx3(inst)
            continue
        result = approx3(inst).tree
        assert verify(result, inst).ok
        normalized = inst.normalized()
        assert approx3(normalized).cost - solve(normalized).cost <= 3
        assert entropy(normalized) <= float(solve(normalized).cost) + 1e-9


def test_entropy_plus_two_bound_for_lt_only():
    rng = random.Random(1)
    for _ in range(20):
        weights = [Fraction(rng.randint(1, 30)) for _ in range(rng.randint(2, 30))]
        inst = Instance.build(weights, ops=["<"]).normalized()
        opt = solve(inst).cost
        assert float(opt) <= entropy(inst) + 2 + 1e-9
        assert float(opt) >= entropy(inst) - 1e-9
        assert math.isfinite(entropy(inst))
