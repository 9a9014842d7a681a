"""Two-way comparison search trees: evaluation, verification, normal forms, text and DOT forms."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence, Union

from .instances import Gap, Instance, InstanceError, Key, Op, QueryClass, parse_op, passes


class TreeError(ValueError):
    """A tree is malformed or does not solve the instance it is used with."""


@dataclass(frozen=True, slots=True)
class Leaf:
    classes: frozenset = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", frozenset(self.classes))


@dataclass(frozen=True, slots=True)
class Node:
    """Internal comparison node ``Q op K_key``; ``key`` is a 1-based key index."""

    op: Op
    key: int
    yes: Tree
    no: Tree


Tree = Union[Node, Leaf]


def leaf(*classes: QueryClass) -> Leaf:
    return Leaf(frozenset(classes))


def make_node(op_token: str | Op, key: int, yes: Tree, no: Tree) -> Node:
    """Build a node from any of ``< <= = >= >``; ``>``/``>=`` become ``<=``/``<`` with swapped children."""
    op, swapped = parse_op(op_token)
    return Node(op, key, no, yes) if swapped else Node(op, key, yes, no)


def classify(tree: Tree, q: QueryClass) -> Leaf:
    node = tree
    while isinstance(node, Node):
        node = node.yes if passes(q.pos, node.op, node.key) else node.no
    return node


def _split(classes: Sequence[QueryClass], node: Node) -> tuple[list, list]:
    yes, no = [], []
    for q in classes:
        (yes if passes(q.pos, node.op, node.key) else no).append(q)
    return yes, no


def walk(tree: Tree, instance: Instance) -> Iterator[tuple[Tree, list[QueryClass], int]]:
    """Preorder ``(node, Queries(node), depth)`` for every node, without recursion."""
    stack = [(tree, list(instance.queries), 0)]
    while stack:
        node, classes, depth = stack.pop()
        yield node, classes, depth
        if isinstance(node, Node):
            yes, no = _split(classes, node)
            stack.append((node.no, no, depth + 1))
            stack.append((node.yes, yes, depth + 1))


def cost(tree: Tree, instance: Instance) -> Any:
    """Expected number of comparisons: sum of class weight times its leaf depth.

    Works for perturbed instances too (the result is then a ``PWeight``). Raises
    ``TreeError`` if two query classes share a leaf.
    """
    total = 0 * instance.beta[0]
    for node, classes, depth in walk(tree, instance):
        if isinstance(node, Leaf):
            if len(classes) > 1:
                raise TreeError(f"classes {classes} share a leaf; the tree is not correct")
            for q in classes:
                total = total + instance.weight(q) * depth
    return total


def internal_weight_sum(tree: Tree, instance: Instance) -> Any:
    """Sum of node weights over internal nodes; equals ``cost`` for correct trees."""
    total = 0 * instance.beta[0]
    for node, classes, _ in walk(tree, instance):
        if isinstance(node, Node):
            for q in classes:
                total = total + instance.weight(q)
    return total


@dataclass
class VerifyReport:
    correct: bool = True
    irreducible: bool = True
    ops_legal: bool = True
    labels_match: bool = True
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.correct and self.irreducible and self.ops_legal and self.labels_match

    def _note(self, msg: str) -> None:
        if len(self.problems) < 50:
            self.problems.append(msg)


def verify(tree: Tree, instance: Instance) -> VerifyReport:
    report = VerifyReport()
    keys = instance.keys
    for node, classes, _ in walk(tree, instance):
        if isinstance(node, Leaf):
            if len(classes) > 1:
                report.correct = False
                report._note("leaf shared by " + ", ".join(q.label(keys) for q in classes))
            if node.classes != frozenset(classes):
                report.labels_match = False
                report._note(
                    "leaf labelled {" + ", ".join(q.label(keys) for q in sorted(node.classes))
                    + "} but reached by {" + ", ".join(q.label(keys) for q in classes) + "}"
                )
            continue
        if node.op not in instance.ops:
            report.ops_legal = False
            report._note(f"operator {node.op} is not allowed")
        if not 1 <= node.key <= instance.n:
            report.ops_legal = False
            report._note(f"key index {node.key} out of range")
            continue
        yes, no = _split(classes, node)
        if not yes or not no:
            report.irreducible = False
            report._note(f"node ({node.op} {instance.label(node.key)}) does not split its queries")
    return report


def relabel(tree: Tree, instance: Instance) -> Tree:
    """Set every leaf's label to the query classes that actually reach it."""
    return _rebuild(tree, list(instance.queries), splice=False)


def make_irreducible(tree: Tree, instance: Instance) -> Tree:
    """Splice out every node that sends all of its queries to one child."""
    return _rebuild(tree, list(instance.queries), splice=True)


def _rebuild(node: Tree, classes: list, splice: bool) -> Tree:
    while splice and isinstance(node, Node):
        yes, no = _split(classes, node)
        if yes and no:
            break
        node = node.yes if yes else node.no
    if isinstance(node, Leaf):
        return Leaf(frozenset(classes))
    yes, no = _split(classes, node)
    return Node(node.op, node.key, _rebuild(node.yes, yes, splice), _rebuild(node.no, no, splice))


def canonicalize_leaf_parents(tree: Tree, instance: Instance) -> Tree:
    """Turn the parent of each single-key leaf into an equality test on that key.

    When both children are key leaves only one of them can be the equality target;
    a node that already tests its yes-leaf for equality is left alone.
    """
    allowed = Op.EQ in instance.ops

    def single_key(t: Tree) -> int | None:
        if isinstance(t, Leaf) and len(t.classes) == 1:
            (q,) = t.classes
            if q.is_key:
                return q.index
        return None

    def go(t: Tree) -> Tree:
        if isinstance(t, Leaf):
            return t
        yes, no = go(t.yes), go(t.no)
        if t.op is Op.EQ and single_key(yes) == t.key:
            return Node(t.op, t.key, yes, no)
        target, other = (yes, no) if single_key(yes) is not None else (no, yes)
        k = single_key(target)
        if k is None:
            return Node(t.op, t.key, yes, no)
        if not allowed:
            raise TreeError("equality comparisons are not allowed in this instance")
        return Node(Op.EQ, k, target, other)

    return go(tree)


def spuler_check(tree: Tree, instance: Instance) -> bool:
    """Every equality node tests a key of maximum weight among the keys reaching it."""
    for node, classes, _ in walk(tree, instance):
        if isinstance(node, Node) and node.op is Op.EQ:
            weights = [instance.beta[q.index - 1] for q in classes if q.is_key]
            if Key(node.key) not in classes or instance.beta[node.key - 1] != max(weights):
                return False
    return True


def internal_nodes(tree: Tree) -> Iterator[Node]:
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            yield t
            stack.append(t.no)
            stack.append(t.yes)


def size(tree: Tree) -> int:
    return sum(1 for _ in internal_nodes(tree))


def height(tree: Tree) -> int:
    best = 0
    stack = [(tree, 0)]
    while stack:
        t, d = stack.pop()
        best = max(best, d)
        if isinstance(t, Node):
            stack.append((t.yes, d + 1))
            stack.append((t.no, d + 1))
    return best


# -- text forms ---------------------------------------------------------------


def _key_label(key: int, keys: Sequence[Any] | None) -> str:
    return f"K{key}" if keys is None else str(keys[key - 1])


def to_sexpr(tree: Tree, keys: Sequence[Any] | None = None) -> str:
    """Compact form, e.g. ``(< K2 (leaf Gap0) (= K2 (leaf K2) (leaf Gap2)))``."""
    out: list[str] = []
    stack: list[Any] = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, str):
            out.append(t)
        elif isinstance(t, Leaf):
            labels = [q.label(keys) for q in sorted(t.classes)]
            out.append("(leaf" + "".join(" " + s for s in labels) + ")")
        else:
            out.append(f"({t.op.value} {_key_label(t.key, keys)} ")
            stack.extend([")", t.no, " ", t.yes])
    return "".join(out)


_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def parse_sexpr(text: str, keys: Sequence[Any]) -> Tree:
    """Inverse of ``to_sexpr``; also accepts ``>`` and ``>=`` nodes."""
    tokens = _TOKEN_RE.findall(text)
    labels = {str(k): i for i, k in enumerate(keys, 1)}
    n = len(keys)
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise TreeError("unexpected end of tree text")
        tok = tokens[pos]
        pos += 1
        return tok

    def key_index(tok: str) -> int:
        if tok in labels:
            return labels[tok]
        raise TreeError(f"unknown key {tok!r}")

    def query_class(tok: str) -> QueryClass:
        m = re.fullmatch(r"Gap(\d+)", tok)
        if m:
            i = int(m.group(1))
            if i > n:
                raise TreeError(f"gap {tok!r} out of range")
            return Gap(i)
        return Key(key_index(tok))

    def expr() -> Tree:
        if take() != "(":
            raise TreeError("expected '('")
        head = take()
        if head == "leaf":
            classes = []
            while tokens[pos:pos + 1] != [")"]:
                classes.append(query_class(take()))
            take()
            return Leaf(frozenset(classes))
        try:
            parse_op(head)
        except InstanceError as exc:
            raise TreeError(str(exc)) from None
        k = key_index(take())
        yes = expr()
        no = expr()
        if take() != ")":
            raise TreeError("expected ')'")
        return make_node(head, k, yes, no)

    tree = expr()
    if pos != len(tokens):
        raise TreeError("trailing text after tree")
    return tree


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(tree: Tree, keys: Sequence[Any] | None = None, name: str = "tree") -> str:
    lines = [f"digraph {name} {{"]
    counter = 0
    stack: list[tuple[Tree, int]] = [(tree, 0)]
    edges: list[str] = []
    while stack:
        t, ident = stack.pop()
        if isinstance(t, Leaf):
            text = ", ".join(q.label(keys) for q in sorted(t.classes)) or "∅"
            lines.append(f'  n{ident} [shape=box, label="{_dot_escape(text)}"];')
            continue
        text = f"{t.op.value} {_key_label(t.key, keys)}"
        lines.append(f'  n{ident} [shape=ellipse, label="{_dot_escape(text)}"];')
        y, nn = counter + 1, counter + 2
        counter += 2
        edges.append(f'  n{ident} -> n{y} [label="Y"];')
        edges.append(f'  n{ident} -> n{nn} [label="N"];')
        stack.append((t.no, nn))
        stack.append((t.yes, y))
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def leaves_partition(tree: Tree, instance: Instance) -> bool:
    seen: list[QueryClass] = []
    for node, classes, _ in walk(tree, instance):
        if isinstance(node, Leaf):
            seen.extend(classes)
    return sorted(seen) == list(instance.queries)
