"""Exact values ``real + eps * e`` with ``e`` a symbolic positive infinitesimal."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any

from .instances import Instance, to_rational


@dataclass(frozen=True, slots=True)
class PWeight:
    """A perturbed weight. Ordering is lexicographic on ``(real, eps)``."""

    real: Fraction = Fraction(0)
    eps: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "real", to_rational(self.real))
        object.__setattr__(self, "eps", to_rational(self.eps))

    @staticmethod
    def lift(x: Any) -> PWeight:
        if isinstance(x, PWeight):
            return x
        if isinstance(x, (Rational, int)):
            return PWeight(Fraction(x), Fraction(0))
        raise TypeError(f"cannot treat {x!r} as a perturbed weight")

    def _pair(self) -> tuple[Fraction, Fraction]:
        return (self.real, self.eps)

    def __add__(self, other: Any) -> PWeight:
        try:
            o = PWeight.lift(other)
        except TypeError:
            return NotImplemented
        return PWeight(self.real + o.real, self.eps + o.eps)

    __radd__ = __add__

    def __neg__(self) -> PWeight:
        return PWeight(-self.real, -self.eps)

    def __sub__(self, other: Any) -> PWeight:
        try:
            o = PWeight.lift(other)
        except TypeError:
            return NotImplemented
        return PWeight(self.real - o.real, self.eps - o.eps)

    def __rsub__(self, other: Any) -> PWeight:
        return PWeight.lift(other) - self

    def __mul__(self, z: Any) -> PWeight:
        if isinstance(z, PWeight):
            return NotImplemented  # products of infinitesimals are not tracked
        z = to_rational(z)
        return PWeight(z * self.real, z * self.eps)

    __rmul__ = __mul__

    def __eq__(self, other: Any) -> bool:
        try:
            return self._pair() == PWeight.lift(other)._pair()
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.real) if self.eps == 0 else hash(self._pair())

    def __lt__(self, other: Any) -> bool:
        return less(self, PWeight.lift(other))

    def __le__(self, other: Any) -> bool:
        return not less(PWeight.lift(other), self)

    def __gt__(self, other: Any) -> bool:
        return less(PWeight.lift(other), self)

    def __ge__(self, other: Any) -> bool:
        return not less(self, PWeight.lift(other))

    def __str__(self) -> str:
        return f"{self.real} + ({self.eps})e"


ZERO = PWeight()


def add(a: PWeight, b: PWeight) -> PWeight:
    return PWeight(a.real + b.real, a.eps + b.eps)


def scale(z: Any, a: PWeight) -> PWeight:
    z = to_rational(z)
    return PWeight(z * a.real, z * a.eps)


def less(a: PWeight, b: PWeight) -> bool:
    return a.real < b.real or (a.real == b.real and a.eps < b.eps)


def perturb_instance(inst: Instance) -> Instance:
    """Replace each key weight ``beta_j`` by ``beta_j + j*e``; gap weights are unchanged.

    Keys that are not queries keep weight zero (absent classes must weigh nothing).
    """
    present = {q.index for q in inst.key_queries()}
    beta = [PWeight(b, j if j in present else 0) for j, b in enumerate(inst.beta, 1)]
    alpha = [PWeight(a, 0) for a in inst.alpha]
    return Instance(inst.keys, tuple(beta), tuple(alpha), inst.ops, inst.queries)


def real_part(x: Any) -> Fraction:
    return x.real if isinstance(x, PWeight) else to_rational(x)
