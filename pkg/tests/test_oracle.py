import random
from fractions import Fraction

import pytest

import _gen
from twcst.approx import alphabetic_depths, AlphabeticProblem
from twcst.dp2wcst import solve
from twcst.instances import InfeasibleInstance, Instance, Key, Op
from twcst.oracle import (
    OracleLimit,
    brute_2wcst,
    brute_gbst,
    brute_opt_set,
    brute_split,
    count_trees,
    enumerate_trees,
)
from twcst.trees import Node, cost, verify


def test_single_key():
    assert brute_2wcst(Instance.build([4]))[1] == 0
    assert brute_split(Instance.build([4])) == 4
    assert brute_gbst([4]) == 4


def test_equality_only_chain_tests_heavier_key_first():
    inst = Instance.build([2, 1], ops=["="])
    tree, value = brute_2wcst(inst)
    assert value == 3
    assert isinstance(tree, Node) and tree.key == 1


def test_size_limit():
    with pytest.raises(OracleLimit):
        brute_2wcst(Instance.build([1] * 13))
    with pytest.raises(OracleLimit):
        list(enumerate_trees(Instance.build([1] * 5)))


def test_infeasible():
    with pytest.raises(InfeasibleInstance):
        brute_2wcst(Instance.build([1, 1], alpha=[1, 1, 1], ops=["="]))


def test_tree_counts():
    assert count_trees(Instance.build([1, 1], ops=["<"])) == 1
    assert count_trees(Instance.build([1, 1], ops=["="])) == 2
    assert count_trees(Instance.build([1] * 4)) == 304


def test_enumeration_agrees_with_subset_recurrence():
    rng = random.Random(2)
    for _ in range(30):
        inst = _gen.instance(rng, rng.randint(1, 3))
        trees = list(enumerate_trees(inst))
        assert len(trees) == count_trees(inst)
        if not trees:
            with pytest.raises(InfeasibleInstance):
                brute_2wcst(inst)
            continue
        assert all(verify(t, inst).ok for t in trees)
        assert min(cost(t, inst) for t in trees) == brute_2wcst(inst)[1]


def test_equals_dp_on_tied_instances():
    rng = random.Random(9)
    for _ in range(30):
        inst = _gen.instance(rng, 5, ties=True)
        try:
            expected = solve(inst).cost
        except InfeasibleInstance:
            continue
        assert brute_2wcst(inst)[1] == expected


def test_brute_opt_set_on_subsets():
    inst = Instance.build([1, 2, 3])
    assert brute_opt_set(inst, [Key(2)]) == 0
    assert brute_opt_set(inst, [Key(1), Key(3)]) == 4
    assert brute_opt_set(inst) == brute_2wcst(inst)[1]


def test_lt_only_successful_equals_alphabetic_optimum():
    rng = random.Random(4)
    for _ in range(30):
        weights = [Fraction(rng.randint(0, 9)) for _ in range(rng.randint(1, 8))]
        inst = Instance.build(weights, ops=["<"])
        problem = AlphabeticProblem(tuple(weights))
        assert brute_2wcst(inst)[1] == problem.cost(alphabetic_depths(weights))


def test_gbst_never_above_split():
    rng = random.Random(6)
    for _ in range(30):
        inst = _gen.instance(rng, rng.randint(1, 6), ties=True, shape="keys-only")
        assert brute_gbst(inst) <= brute_split(inst)
