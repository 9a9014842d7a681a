import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _gen
from twcst.dp2wcst import solve
from twcst.instances import InfeasibleInstance, Instance, Key, Op
from twcst.oracle import brute_gbst, brute_split
from twcst.splitgbst import (
    GbstError,
    GbstNode,
    cheaper_counterexample_tree,
    counterexample_instance,
    gbst_cost,
    heaviest_equality_keys,
    huang_wong,
    huang_wong_tree,
    hw_monotonicity_probe,
    lightest_equality_keys,
    optimal_gbst_small,
    optimal_split_tree,
    split_cost,
    to_text,
    trace,
)

small_betas = st.lists(st.integers(0, 12).map(Fraction), min_size=1, max_size=6)


def test_gbst_cost_examples():
    assert gbst_cost(GbstNode(1, None), [7]) == 7
    heavy_root = GbstNode(2, None, GbstNode(1, None))
    light_root = GbstNode(1, None, GbstNode(2, None))
    assert gbst_cost(heavy_root, [1, 5]) == 1 * 2 + 5 < gbst_cost(light_root, [1, 5])


def test_trace_and_cost_errors():
    tree = GbstNode(2, 2, GbstNode(1, None), None)
    assert trace(tree, Key(1))[0::2] == (2, True)
    with pytest.raises(GbstError, match="not found"):
        gbst_cost(GbstNode(1, None), [1, 1])
    inst = Instance.build([1], alpha=[1, 1])
    with pytest.raises(GbstError, match="same empty subtree"):
        split_cost(GbstNode(1, None), inst)


def test_counterexample_table():
    table = counterexample_instance()
    assert len(table) == 31
    assert table["c0"] == 5 and table["d1"] == 22
    assert list(table) == sorted(table)
    assert sum(1 for v in table.values() if v == 20) == 14


def test_huang_wong_reproduces_published_values():
    table = counterexample_instance()
    assert huang_wong(table) == 1763
    before, after, violated = hw_monotonicity_probe(table, "d1", Fraction(99, 100))
    assert before == 1763 and after < 1763 and violated
    assert after == Fraction(176299, 100)
    assert hw_monotonicity_probe(table, "d1", 0)[2] is False


def test_cheaper_tree_certificate():
    table = counterexample_instance()
    tree, value = cheaper_counterexample_tree(table)
    assert value == gbst_cost(tree, table) == 1762
    assert tree.equality_key == list(table).index("d1") + 1


def test_huang_wong_single_key():
    assert huang_wong([9]) == 9
    tree, value = huang_wong_tree([9])
    assert tree == GbstNode(1, 1) and value == 9


@settings(max_examples=60, deadline=None)
@given(small_betas)
def test_huang_wong_value_is_realized_and_not_below_optimum(beta):
    tree, value = huang_wong_tree(beta)
    assert gbst_cost(tree, beta) == value
    best_tree, best = optimal_gbst_small(beta)
    assert best <= value
    assert gbst_cost(best_tree, beta) == best
    assert best == brute_gbst(beta)
    assert lightest_equality_keys(best_tree, beta)


@settings(max_examples=40, deadline=None)
@given(small_betas, st.data())
def test_true_optimum_is_monotone(beta, data):
    key = data.draw(st.integers(0, len(beta) - 1))
    raised = list(beta)
    raised[key] += data.draw(st.fractions(min_value=0, max_value=5, max_denominator=4))
    assert optimal_gbst_small(raised)[1] >= optimal_gbst_small(beta)[1]


def test_optimal_gbst_root_can_avoid_heaviest_key():
    rng = random.Random(0)
    for _ in range(2000):
        beta = [Fraction(rng.randint(1, 9)) for _ in range(rng.randint(3, 6))]
        tree, value = optimal_gbst_small(beta)
        heaviest = max(beta)
        if beta[tree.equality_key - 1] < heaviest and value < brute_split(Instance.build(beta)):
            return
    pytest.fail("no instance found where the optimal root skips the heaviest key")


def test_optimal_gbst_small_limit():
    assert optimal_gbst_small([4])[1] == 4
    with pytest.raises(ValueError):
        optimal_gbst_small([1] * 13)


def test_split_tree_single_key():
    inst = Instance.build([2], alpha=[3, 5])
    tree, value = optimal_split_tree(inst)
    assert value == 10 and tree.equality_key == 1


def test_tied_weights_need_the_exact_search():
    inst = Instance.build([1, 1, 1], alpha=[2, 1, 0, 0])
    assert optimal_split_tree(inst).cost == brute_split(inst) == 10
    assert optimal_split_tree(inst, ties="perturbed").cost == 11
    with pytest.raises(ValueError):
        optimal_split_tree(inst, ties="coin")


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 7), st.booleans())
def test_split_tree_matches_oracle(seed, n, ties):
    inst = _gen.instance(random.Random(seed), n, ops={Op.LT, Op.LE, Op.EQ}, ties=ties)
    try:
        expected = brute_split(inst)
    except InfeasibleInstance:
        # too few key queries to host the nodes that separate the gaps
        with pytest.raises(InfeasibleInstance):
            optimal_split_tree(inst)
        return
    tree, value = optimal_split_tree(inst)
    assert value == expected == split_cost(tree, inst)
    assert heaviest_equality_keys(tree, inst)
    assert brute_gbst(inst) <= value
    # each split node is one equality test plus one inequality test
    assert solve(inst.with_ops(["<", "="])).cost <= 2 * value


def test_distinct_weights_dp_and_search_agree():
    rng = random.Random(12)
    for _ in range(30):
        n = rng.randint(1, 7)
        beta = rng.sample(range(1, 50), n)
        inst = Instance.build(beta, alpha=[rng.randint(0, 9) for _ in range(n + 1)])
        assert optimal_split_tree(inst, ties="perturbed").cost == brute_split(inst)


def test_to_text():
    tree = GbstNode(2, 2, GbstNode(1, None), None)
    assert to_text(tree) == "(K2 <K2 (K1 * - -) -)"
    assert to_text(None) == "-"
    assert to_text(tree, ["a", "b"]) == "(b <b (a * - -) -)"
