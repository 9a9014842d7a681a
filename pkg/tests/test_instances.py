import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _gen
from twcst.instances import (
    Gap,
    InfeasibleInstance,
    Instance,
    InstanceError,
    InstanceFormatError,
    Key,
    Op,
    Variant,
    canonical_queries,
    normalize_ops,
    parse_instance,
    passes,
    realize_cut,
    serialize_instance,
)

HOW = """\
ops: < <= =
keys: H O W
beta: 1 1 1
"""


def test_parse_three_keys_successful_only():
    inst = parse_instance(HOW)
    assert inst.n == 3
    assert inst.keys == ("H", "O", "W")
    assert inst.queries == (Key(1), Key(2), Key(3))
    assert inst.ops == {Op.LT, Op.LE, Op.EQ}
    assert parse_instance(serialize_instance(inst)) == inst


def test_standard_queries_line():
    inst = parse_instance(HOW + "alpha: 0 1 0 2\nqueries: standard\n")
    assert len(inst.queries) == 7
    assert inst.variant is Variant.STANDARD


def test_duplicate_key_rejected():
    with pytest.raises(InstanceFormatError, match="duplicate"):
        parse_instance("keys: A B A\nbeta: 1 1 1\n")


def test_unsorted_keys_and_bad_weights():
    with pytest.raises(InstanceFormatError):
        parse_instance("keys: B A\nbeta: 1 1\n")
    with pytest.raises(InstanceFormatError, match="expected 2"):
        parse_instance("keys: A B\nbeta: 1\n")
    with pytest.raises(InstanceFormatError, match="negative"):
        parse_instance("keys: A B\nbeta: 1 -1\n")
    with pytest.raises(InstanceFormatError, match="line 2"):
        parse_instance("keys: A B\nbeta: 1 x\n")


def test_int_keys_and_explicit_queries():
    inst = parse_instance("keytype: int\nkeys: 10 20\nbeta: 1 0\nalpha: 0 3 0\nqueries: 10 15\n")
    assert inst.queries == (Key(1), Gap(1))
    assert inst.weight(Gap(1)) == 3


def test_weight_on_absent_class_is_an_error():
    with pytest.raises(InstanceError, match="not a query"):
        Instance.build([1, 2], alpha=[1, 0, 0], queries=[Key(1), Key(2)])


def test_normalize_ops_examples():
    assert normalize_ops([">"]) == {Op.LE}
    assert normalize_ops(["<", "<=", "="]) == {Op.LT, Op.LE, Op.EQ}
    assert normalize_ops([">=", "<"]) == {Op.LT}
    with pytest.raises(InstanceError):
        normalize_ops([])
    with pytest.raises(InstanceError):
        normalize_ops(["!="])


def test_canonical_queries_counts():
    assert len(canonical_queries(3, Variant.STANDARD)) == 7
    assert len(canonical_queries(3, Variant.SUCCESSFUL_ONLY)) == 3
    assert canonical_queries(1) == [Gap(0), Key(1), Gap(1)]


def test_infeasible_is_an_instance_error():
    assert issubclass(InfeasibleInstance, InstanceError)


def test_normalized_sums_to_one():
    inst = Instance.build([1, 2, 3], alpha=[1, 1, 1, 1])
    assert inst.normalized().total_weight() == 1
    assert inst.scaled(3).total_weight() == 3 * inst.total_weight()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9))
def test_serialize_round_trip(seed, n):
    inst = _gen.instance(random.Random(seed), n)
    assert parse_instance(serialize_instance(inst)) == inst


@pytest.mark.parametrize("ops", _gen.OP_SUBSETS)
def test_realize_cut_matches_exhaustive_search(ops):
    n = 4
    for left in range(2 * n + 1):
        for right in range(left + 1, 2 * n + 1):
            options = [
                (k, 0 if op is Op.LT else 1, op)
                for k in range(1, n + 1)
                for op in (Op.LT, Op.LE)
                if op in ops and passes(left, op, k) and not passes(right, op, k)
            ]
            got = realize_cut(left, right, ops, n)
            if not options:
                assert got is None
            else:
                k, _, op = min(options)
                assert got == (op, k)


def test_rational_weights_keep_exact_values():
    inst = parse_instance("keys: a b\nbeta: 1/3 2/7\n")
    assert inst.beta == (Fraction(1, 3), Fraction(2, 7))
