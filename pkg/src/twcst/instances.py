"""Problem instances, comparison operators, query classes and the instance file format."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence


class InstanceError(ValueError):
    """An instance violates one of its invariants."""


class InstanceFormatError(InstanceError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, lineno: int | None, message: str):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)


class InfeasibleInstance(InstanceError):
    """No tree over the allowed comparisons separates all query classes."""


class Op(str, enum.Enum):
    LT = "<"
    LE = "<="
    EQ = "="

    def __str__(self) -> str:
        return self.value


# '>' and '>=' are complements of '<=' and '<': the node keeps the same key
# but its yes/no children trade places (see trees.make_node).
_OP_TOKENS = {
    "<": (Op.LT, False),
    "<=": (Op.LE, False),
    "≤": (Op.LE, False),
    "=": (Op.EQ, False),
    "==": (Op.EQ, False),
    ">": (Op.LE, True),
    ">=": (Op.LT, True),
    "≥": (Op.LT, True),
}
OP_ORDER = (Op.LT, Op.LE, Op.EQ)


def parse_op(token: str | Op) -> tuple[Op, bool]:
    """Map an operator token to ``(op, swapped)``; ``swapped`` means yes/no trade places."""
    if isinstance(token, Op):
        return token, False
    try:
        return _OP_TOKENS[token]
    except KeyError:
        raise InstanceError(f"unknown operator token {token!r}") from None


def normalize_ops(raw_ops: Iterable[str | Op]) -> frozenset[Op]:
    ops = frozenset(parse_op(t)[0] for t in raw_ops)
    if not ops:
        raise InstanceError("the set of allowed comparisons is empty")
    return ops


def format_ops(ops: Iterable[Op]) -> str:
    ops = set(ops)
    return " ".join(op.value for op in OP_ORDER if op in ops)


@dataclass(frozen=True, order=True, slots=True)
class QueryClass:
    """An equivalence class of query values, encoded by its position in key order.

    Positions interleave gaps and keys: ``Gap(0) < Key(1) < Gap(1) < ... < Key(n) < Gap(n)``,
    so ``Key(i)`` sits at ``2i - 1`` and ``Gap(i)`` at ``2i``.
    """

    pos: int

    @classmethod
    def key(cls, i: int) -> QueryClass:
        return cls(2 * i - 1)

    @classmethod
    def gap(cls, i: int) -> QueryClass:
        return cls(2 * i)

    @property
    def is_key(self) -> bool:
        return self.pos % 2 == 1

    @property
    def index(self) -> int:
        return (self.pos + 1) // 2 if self.is_key else self.pos // 2

    def label(self, keys: Sequence[Any] | None = None) -> str:
        if not self.is_key:
            return f"Gap{self.index}"
        if keys is None:
            return f"K{self.index}"
        return str(keys[self.index - 1])

    def __repr__(self) -> str:
        return f"{'Key' if self.is_key else 'Gap'}({self.index})"


def Key(i: int) -> QueryClass:
    return QueryClass.key(i)


def Gap(i: int) -> QueryClass:
    return QueryClass.gap(i)


def passes(pos: int, op: Op, key: int) -> bool:
    """Whether a query at class position ``pos`` satisfies ``Q op K_key``."""
    kpos = 2 * key - 1
    if op is Op.LT:
        return pos < kpos
    if op is Op.LE:
        return pos <= kpos
    return pos == kpos


def threshold(op: Op, key: int) -> int:
    """Inequality nodes send exactly the positions below the threshold to the yes side."""
    if op is Op.LT:
        return 2 * key - 1
    if op is Op.LE:
        return 2 * key
    raise ValueError("equality comparisons have no threshold")


def realize_cut(left: int, right: int, ops: Iterable[Op], n: int) -> tuple[Op, int] | None:
    """Cheapest-labelled inequality ``(op, key)`` sending position ``left`` to yes and ``right`` to no.

    Prefers the smallest key index, then ``<`` over ``<=``. ``None`` if no allowed
    inequality separates the two positions.
    """
    best = None
    if Op.LT in ops:
        k = (left + 1) // 2 + 1
        if 1 <= k <= n and left < 2 * k - 1 <= right:
            best = (k, 0, Op.LT)
    if Op.LE in ops:
        k = (left + 2) // 2
        if 1 <= k <= n and left <= 2 * k - 1 < right:
            cand = (k, 1, Op.LE)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    return best[2], best[0]


class Variant(str, enum.Enum):
    STANDARD = "standard"
    SUCCESSFUL_ONLY = "keys-only"


def canonical_queries(keys: Sequence[Any] | int, variant: Variant | str = Variant.STANDARD) -> list[QueryClass]:
    n = keys if isinstance(keys, int) else len(keys)
    if n < 1:
        raise InstanceError("at least one key is required")
    if Variant(variant) is Variant.STANDARD:
        return [QueryClass(p) for p in range(2 * n + 1)]
    return [Key(i) for i in range(1, n + 1)]


def to_rational(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats enter through literals such as 0.99; take their shortest decimal form
        return Fraction(repr(value))
    return Fraction(value)


def _coerce_weight(value: Any) -> Any:
    # PWeight values (perturbed instances) pass through untouched
    if hasattr(value, "eps"):
        return value
    return to_rational(value)


@dataclass(frozen=True)
class Instance:
    """Keys, query classes, allowed comparisons and weights (beta for keys, alpha for gaps)."""

    keys: tuple
    beta: tuple
    alpha: tuple
    ops: frozenset
    queries: tuple

    def __post_init__(self) -> None:
        keys = tuple(self.keys)
        n = len(keys)
        if n < 1:
            raise InstanceError("at least one key is required")
        for a, b in zip(keys, keys[1:]):
            if a == b:
                raise InstanceError(f"duplicate key {a!r}")
            if not a < b:
                raise InstanceError(f"keys must be strictly increasing ({a!r} before {b!r})")
        beta = tuple(_coerce_weight(w) for w in self.beta)
        alpha = tuple(_coerce_weight(w) for w in self.alpha)
        if len(beta) != n:
            raise InstanceError(f"expected {n} beta weights, got {len(beta)}")
        if len(alpha) != n + 1:
            raise InstanceError(f"expected {n + 1} alpha weights, got {len(alpha)}")
        for w in beta + alpha:
            if w < 0:
                raise InstanceError(f"negative weight {w}")
        ops = normalize_ops(self.ops)
        queries = []
        for q in self.queries:
            q = q if isinstance(q, QueryClass) else QueryClass(int(q))
            if not 0 <= q.pos <= 2 * n:
                raise InstanceError(f"query class {q!r} outside the {2 * n + 1} classes of {n} keys")
            queries.append(q)
        queries.sort()
        if not queries:
            raise InstanceError("the query set is empty")
        for a, b in zip(queries, queries[1:]):
            if a == b:
                raise InstanceError(f"two queries fall in the class {a!r}")
        present = {q.pos for q in queries}
        for p in range(2 * n + 1):
            q = QueryClass(p)
            if p not in present and self._raw_weight(q, alpha, beta) != 0:
                raise InstanceError(f"class {q!r} has nonzero weight but is not a query")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "queries", tuple(queries))

    @staticmethod
    def _raw_weight(q: QueryClass, alpha, beta):
        return beta[q.index - 1] if q.is_key else alpha[q.index]

    @classmethod
    def build(
        cls,
        beta: Sequence[Any],
        alpha: Sequence[Any] | None = None,
        ops: Iterable[str | Op] = ("<", "<=", "="),
        keys: Sequence[Any] | None = None,
        queries: Variant | str | Iterable[QueryClass] | None = None,
    ) -> Instance:
        """Convenience constructor: keys default to ``1..n``; with no alpha, successful queries only."""
        n = len(beta)
        keys = tuple(range(1, n + 1)) if keys is None else tuple(keys)
        if queries is None:
            queries = Variant.SUCCESSFUL_ONLY if alpha is None else Variant.STANDARD
        if isinstance(queries, (Variant, str)):
            queries = canonical_queries(n, queries)
        alpha = (0,) * (n + 1) if alpha is None else tuple(alpha)
        return cls(keys, tuple(beta), alpha, normalize_ops(ops), tuple(queries))

    @property
    def n(self) -> int:
        return len(self.keys)

    def weight(self, q: QueryClass) -> Any:
        return self._raw_weight(q, self.alpha, self.beta)

    def query_weights(self) -> list:
        return [self.weight(q) for q in self.queries]

    def total_weight(self) -> Any:
        return sum(self.query_weights(), 0 * self.beta[0])

    def key_queries(self) -> list[QueryClass]:
        return [q for q in self.queries if q.is_key]

    @property
    def variant(self) -> Variant | None:
        pos = [q.pos for q in self.queries]
        if pos == list(range(2 * self.n + 1)):
            return Variant.STANDARD
        if pos == list(range(1, 2 * self.n, 2)):
            return Variant.SUCCESSFUL_ONLY
        return None

    def with_ops(self, ops: Iterable[str | Op]) -> Instance:
        return Instance(self.keys, self.beta, self.alpha, normalize_ops(ops), self.queries)

    def with_weights(self, beta: Sequence[Any], alpha: Sequence[Any]) -> Instance:
        return Instance(self.keys, tuple(beta), tuple(alpha), self.ops, self.queries)

    def scaled(self, factor: Any) -> Instance:
        factor = to_rational(factor)
        return self.with_weights([factor * b for b in self.beta], [factor * a for a in self.alpha])

    def normalized(self) -> Instance:
        total = self.total_weight()
        if total == 0:
            raise InstanceError("cannot normalize an instance of total weight 0")
        return self.scaled(1 / to_rational(total))

    def label(self, key: int) -> str:
        return str(self.keys[key - 1])


_GAP_RE = re.compile(r"^Gap(\d+)$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_instance(text: str) -> Instance:
    """Parse the line-oriented ``field: values`` instance format."""
    fields: dict[str, tuple[int, list[str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        name, sep, rest = line.partition(":")
        name = name.strip().lower()
        if not sep or not name:
            raise InstanceFormatError(lineno, f"expected 'field: values', got {raw.strip()!r}")
        if name not in {"ops", "keys", "keytype", "beta", "alpha", "queries"}:
            raise InstanceFormatError(lineno, f"unknown field {name!r}")
        if name in fields:
            raise InstanceFormatError(lineno, f"field {name!r} given twice")
        fields[name] = (lineno, rest.split())

    def line_of(name: str) -> int | None:
        return fields[name][0] if name in fields else None

    if "keys" not in fields:
        raise InstanceFormatError(None, "missing 'keys' line")
    if "beta" not in fields:
        raise InstanceFormatError(None, "missing 'beta' line")

    keytype = "str"
    if "keytype" in fields:
        lineno, toks = fields["keytype"]
        if toks not in (["int"], ["str"]):
            raise InstanceFormatError(lineno, "keytype must be 'int' or 'str'")
        keytype = toks[0]

    lineno, toks = fields["keys"]
    if not toks:
        raise InstanceFormatError(lineno, "no keys given")
    if keytype == "int":
        try:
            keys = [int(t) for t in toks]
        except ValueError as exc:
            raise InstanceFormatError(lineno, f"non-integer key: {exc}") from None
    else:
        keys = list(toks)
        for k in keys:
            if _GAP_RE.match(k):
                raise InstanceFormatError(lineno, f"key {k!r} clashes with gap class names")
    seen = set()
    for k in keys:
        if k in seen:
            raise InstanceFormatError(lineno, f"duplicate key {k!r}")
        seen.add(k)
    for a, b in zip(keys, keys[1:]):
        if not a < b:
            raise InstanceFormatError(lineno, f"keys must be strictly increasing ({a!r} before {b!r})")
    n = len(keys)

    def weights(name: str, count: int) -> list[Fraction]:
        lineno, toks = fields[name]
        if len(toks) != count:
            raise InstanceFormatError(lineno, f"expected {count} {name} weights, got {len(toks)}")
        out = []
        for t in toks:
            try:
                w = Fraction(t)
            except (ValueError, ZeroDivisionError):
                raise InstanceFormatError(lineno, f"bad rational {t!r}") from None
            if w < 0:
                raise InstanceFormatError(lineno, f"negative weight {t}")
            out.append(w)
        return out

    beta = weights("beta", n)
    alpha = weights("alpha", n + 1) if "alpha" in fields else [Fraction(0)] * (n + 1)

    ops_line = line_of("ops")
    raw_ops = fields["ops"][1] if "ops" in fields else ["<", "<=", "="]
    try:
        ops = normalize_ops(raw_ops)
    except InstanceError as exc:
        raise InstanceFormatError(ops_line, str(exc)) from None

    q_line = line_of("queries")
    if "queries" not in fields:
        queries = canonical_queries(n, Variant.STANDARD if "alpha" in fields else Variant.SUCCESSFUL_ONLY)
    else:
        toks = fields["queries"][1]
        if toks in (["standard"], ["keys-only"]):
            queries = canonical_queries(n, toks[0])
        elif not toks:
            raise InstanceFormatError(q_line, "empty query list")
        else:
            queries = [_parse_query(t, keys, keytype, q_line) for t in toks]
            pos = [q.pos for q in queries]
            if len(set(pos)) != len(pos):
                raise InstanceFormatError(q_line, "two queries fall in the same class")

    try:
        return Instance(tuple(keys), tuple(beta), tuple(alpha), ops, tuple(queries))
    except InstanceFormatError:
        raise
    except InstanceError as exc:
        lineno = q_line if "query" in str(exc) or "class" in str(exc) else None
        raise InstanceFormatError(lineno, str(exc)) from None


def _parse_query(token: str, keys: list, keytype: str, lineno: int | None) -> QueryClass:
    n = len(keys)
    m = _GAP_RE.match(token)
    if m:
        i = int(m.group(1))
        if i > n:
            raise InstanceFormatError(lineno, f"query {token!r} outside the classes of {n} keys")
        return Gap(i)
    if keytype == "int":
        try:
            value: Any = int(token)
        except ValueError:
            raise InstanceFormatError(lineno, f"query {token!r} is not an integer") from None
    else:
        value = token
    # position among keys: number of keys strictly below the value
    below = sum(1 for k in keys if k < value)
    if below < n and keys[below] == value:
        return Key(below + 1)
    return Gap(below)


def _fmt(w: Fraction) -> str:
    return str(w)


def serialize_instance(inst: Instance) -> str:
    for k in inst.keys:
        if isinstance(k, str) and (not k or any(c.isspace() for c in k) or "#" in k):
            raise InstanceError(f"key {k!r} cannot be written in the text format")
    lines = [f"ops: {format_ops(inst.ops)}"]
    if all(isinstance(k, int) for k in inst.keys):
        lines.append("keytype: int")
    lines.append("keys: " + " ".join(str(k) for k in inst.keys))
    lines.append("beta: " + " ".join(_fmt(w) for w in inst.beta))
    variant = inst.variant
    if variant is Variant.SUCCESSFUL_ONLY:
        lines.append("queries: keys-only")
    else:
        lines.append("alpha: " + " ".join(_fmt(w) for w in inst.alpha))
        if variant is Variant.STANDARD:
            lines.append("queries: standard")
        else:
            lines.append("queries: " + " ".join(q.label(inst.keys) for q in inst.queries))
    return "\n".join(lines) + "\n"
