from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from twcst.instances import Instance, Key
from twcst.perturb import PWeight, add, less, perturb_instance, real_part, scale

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)
pweights = st.builds(PWeight, rationals, rationals)


def test_add_examples():
    assert add(PWeight(1, 2), PWeight(3, 4)) == PWeight(4, 6)
    assert add(PWeight(Fraction(1, 3), 7), PWeight()) == PWeight(Fraction(1, 3), 7)
    assert add(PWeight(1, -1), PWeight(-1, 1)) == PWeight(0, 0)


def test_scale_examples():
    assert scale(2, PWeight(3, 5)) == PWeight(6, 10)
    assert scale(0, PWeight(7, 9)) == PWeight()
    assert scale(1, PWeight(7, 9)) == PWeight(7, 9)


def test_less_examples():
    assert less(PWeight(1, 9), PWeight(2, 0))
    assert less(PWeight(1, 2), PWeight(1, 3))
    assert not less(PWeight(4, 4), PWeight(4, 4))


def test_operators_mix_with_plain_rationals():
    assert PWeight(1, 1) + 2 == PWeight(3, 1)
    assert 2 + PWeight(1, 1) == PWeight(3, 1)
    assert PWeight(3, 1) - 1 == PWeight(2, 1)
    assert PWeight(3, 0) == 3 and PWeight(3, 1) > 3
    assert str(PWeight(Fraction(1, 2), 3)) == "1/2 + (3)e"
    assert real_part(PWeight(5, 2)) == 5 and real_part(Fraction(1, 4)) == Fraction(1, 4)


def test_perturb_instance_breaks_ties_by_index():
    inst = perturb_instance(Instance.build([5, 5, 5]))
    assert inst.beta == (PWeight(5, 1), PWeight(5, 2), PWeight(5, 3))
    assert len(set(inst.beta)) == 3
    assert perturb_instance(Instance.build([7])).beta == (PWeight(7, 1),)
    order = sorted(range(1, 4), key=lambda j: inst.beta[j - 1])
    assert order == [1, 2, 3]


def test_perturb_keeps_gap_weights_and_absent_keys():
    inst = Instance.build([2, 0, 1], alpha=[1, 0, 0, 4], queries=[Key(1), Key(3), *[q for q in Instance.build([1, 1, 1], alpha=[1] * 4).queries if not q.is_key]])
    out = perturb_instance(inst)
    assert out.alpha == tuple(PWeight(a, 0) for a in inst.alpha)
    assert out.beta[1] == PWeight(0, 0)


@given(pweights, pweights, pweights)
def test_less_is_a_strict_total_order(a, b, c):
    assert not less(a, a)
    assert less(a, b) + less(b, a) + (a == b) == 1
    if less(a, b) and less(b, c):
        assert less(a, c)


@given(pweights, pweights, rationals)
def test_arithmetic_is_componentwise(a, b, z):
    assert add(a, b) == PWeight(a.real + b.real, a.eps + b.eps)
    assert scale(z, add(a, b)) == add(scale(z, a), scale(z, b))
    assert add(a, b) == add(b, a)
