"""Local subtree exchanges that leave the classification of every query unchanged.

Inequality nodes are compared through their thresholds: ``<K_i`` sends class
positions below ``2i-1`` to its yes side, ``<=K_i`` those below ``2i``.

* ``A1`` pushes an equality test below the inequality test under it, into the
  side that the tested key takes.
* ``A2`` rotates two inequality nodes (``inverse=True`` rotates the other way).
* ``A3`` is ``A2`` on the inequality child followed by ``A1``.
* ``A4`` is a double rotation lifting a grandchild two levels.
"""

from __future__ import annotations

from .instances import Key, Op, passes, threshold
from .trees import Node, Tree


class PatternMismatch(ValueError):
    """The subtree does not have the shape or side conditions a rule needs."""


def _ineq(t: Tree) -> bool:
    return isinstance(t, Node) and t.op is not Op.EQ


def _eq(t: Tree) -> bool:
    return isinstance(t, Node) and t.op is Op.EQ


def _t(node: Node) -> int:
    return threshold(node.op, node.key)


def rewrite(subtree: Tree, rule: str, inverse: bool = False) -> Tree:
    rule = rule.upper()
    if rule == "A1":
        return _a1(subtree)
    if rule == "A2":
        return _a2_inverse(subtree) if inverse else _a2(subtree)
    if rule == "A3":
        return _a3(subtree)
    if rule == "A4":
        return _a4(subtree)
    raise ValueError(f"unknown rule {rule!r}")


def _a1(t: Tree) -> Tree:
    if not (_eq(t) and _ineq(t.no)):
        raise PatternMismatch("A1 needs (= a X (<op> b T0 T1))")
    b = t.no
    if passes(Key(t.key).pos, b.op, b.key):
        return Node(b.op, b.key, Node(Op.EQ, t.key, t.yes, b.yes), b.no)
    return Node(b.op, b.key, b.yes, Node(Op.EQ, t.key, t.yes, b.no))


def _a2(t: Tree) -> Tree:
    if not (_ineq(t) and _ineq(t.no)):
        raise PatternMismatch("A2 needs (<op> b T0 (<op> c T10 T11))")
    c = t.no
    if _t(t) > _t(c):
        raise PatternMismatch("A2 needs the lower node's threshold at or above the root's")
    return Node(c.op, c.key, Node(t.op, t.key, t.yes, c.yes), c.no)


def _a2_inverse(t: Tree) -> Tree:
    if not (_ineq(t) and _ineq(t.yes)):
        raise PatternMismatch("inverse A2 needs (<op> c (<op> b T0 T10) T11)")
    b = t.yes
    if _t(b) > _t(t):
        raise PatternMismatch("inverse A2 needs the lower node's threshold at or below the root's")
    return Node(b.op, b.key, b.yes, Node(t.op, t.key, b.no, t.no))


def _a3(t: Tree) -> Tree:
    if not (_eq(t) and _ineq(t.no)):
        raise PatternMismatch("A3 needs (= a X (<op> b ...)) with an inequality grandchild")
    b = t.no
    apos = Key(t.key).pos
    if _ineq(b.no) and _t(b) <= _t(b.no) and not passes(apos, b.no.op, b.no.key):
        c = b.no
        return Node(c.op, c.key, Node(b.op, b.key, b.yes, c.yes), Node(Op.EQ, t.key, t.yes, c.no))
    if _ineq(b.yes) and _t(b.yes) <= _t(b) and passes(apos, b.yes.op, b.yes.key):
        c = b.yes
        return Node(c.op, c.key, Node(Op.EQ, t.key, t.yes, c.yes), Node(b.op, b.key, c.no, b.no))
    raise PatternMismatch("A3 side conditions fail")


def _a4(t: Tree) -> Tree:
    if not _ineq(t):
        raise PatternMismatch("A4 needs an inequality root")
    c = t.no
    if _ineq(c) and _ineq(c.yes) and _t(t) <= _t(c.yes) <= _t(c):
        d = c.yes
        return Node(d.op, d.key, Node(t.op, t.key, t.yes, d.yes), Node(c.op, c.key, d.no, c.no))
    c = t.yes
    if _ineq(c) and _ineq(c.no) and _t(c) <= _t(c.no) <= _t(t):
        d = c.no
        return Node(d.op, d.key, Node(c.op, c.key, c.yes, d.yes), Node(t.op, t.key, d.no, t.no))
    raise PatternMismatch("A4 needs (<op> b T0 (<op> c (<op> d T100 T101) T11)) with ordered thresholds")
