"""Command-line front end: ``twcst <command> [flags]``.

Every command builds an ordered report; text mode prints it as ``key: value``
lines and ``--json`` prints the same fields as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import sys
import time
from fractions import Fraction
from typing import Any

from . import __version__
from .approx import EqualityOnly, approx3, entropy, equality_chain
from .dp2wcst import solve
from .instances import (
    InfeasibleInstance,
    Instance,
    InstanceError,
    Op,
    Variant,
    canonical_queries,
    format_ops,
    normalize_ops,
    parse_instance,
    serialize_instance,
)
from .noeq import solve_noeq
from .oracle import OracleLimit, brute_2wcst, brute_gbst, brute_split
from .splitgbst import (
    cheaper_counterexample_tree,
    counterexample_instance,
    gbst_cost,
    huang_wong,
    hw_monotonicity_probe,
    optimal_split_tree,
    to_text,
)
from .trees import TreeError, cost, export_dot, parse_sexpr, spuler_check, to_sexpr, verify

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3
BENCH_SIZES = (50, 100, 200)


class UsageError(Exception):
    pass


class InvariantFailure(Exception):
    pass


def _rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _decimal(x: Fraction, places: int = 9) -> str:
    return f"{float(x):.{places}f}"


def _cost_fields(report: dict, name: str, value: Fraction) -> None:
    report[name] = _rational(value)
    report[name + "_decimal"] = _decimal(value)


def _load(args) -> Instance:
    path = args.input
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        instance = parse_instance(text)
    except InstanceError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if getattr(args, "ops", None):
        instance = instance.with_ops(_ops(args.ops))
    return instance


def _ops(text: str) -> frozenset:
    tokens = text.replace(",", " ").split()
    try:
        return normalize_ops(tokens)
    except InstanceError as exc:
        raise UsageError(str(exc)) from None


def _write_dot(path: str | None, dot: str) -> None:
    if path is None:
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dot)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _checked(tree, instance: Instance) -> dict:
    report = verify(tree, instance)
    if not report.ok:
        raise InvariantFailure("solver produced an invalid tree: " + "; ".join(report.problems))
    return {"verified": True}


def cmd_solve(args) -> dict:
    instance = _load(args)
    report: dict[str, Any] = {"n": instance.n}
    if args.no_equality:
        if instance.ops == {Op.EQ}:
            raise UsageError("--no-equality needs at least one inequality operator")
        instance = instance.with_ops(instance.ops - {Op.EQ})
        report["ops"] = format_ops(instance.ops)
        report["method"] = "alphabetic-reduction"
        tree, value = solve_noeq(instance)
    else:
        report["ops"] = format_ops(instance.ops)
        report["method"] = "interval-dp"
        tree, value = solve(instance)
    _cost_fields(report, "cost", value)
    report.update(_checked(tree, instance))
    if not spuler_check(tree, instance):
        raise InvariantFailure("an equality node does not test a heaviest remaining key")
    report["spuler"] = True
    report["tree"] = to_sexpr(tree, instance.keys)
    _write_dot(args.dot, export_dot(tree, instance.keys))
    return report


def cmd_approx(args) -> dict:
    instance = _load(args)
    total = Fraction(instance.total_weight())
    if total == 0:
        raise UsageError("all weights are zero; entropy is undefined")
    report: dict[str, Any] = {"n": instance.n, "ops": format_ops(instance.ops)}
    try:
        result = approx3(instance)
        tree, value = result.tree, result.cost
        report["method"] = "grouped-alphabetic"
    except EqualityOnly:
        tree, value = equality_chain(instance)
        report["method"] = "equality-chain"
    report.update(_checked(tree, instance))
    _cost_fields(report, "cost", value)
    report["normalization"] = _rational(total)
    h = entropy(instance.normalized())
    report["entropy"] = f"{h:.9f}"
    report["gap_to_entropy"] = f"{float(value / total) - h:.9f}"
    if args.exact:
        best = solve(instance).cost
        _cost_fields(report, "optimum", best)
        _cost_fields(report, "gap_to_optimum", value - best)
    report["tree"] = to_sexpr(tree, instance.keys)
    _write_dot(args.dot, export_dot(tree, instance.keys))
    return report


def cmd_verify(args) -> dict:
    instance = _load(args)
    text = args.tree
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {text[1:]}: {exc.strerror or exc}") from None
    try:
        tree = parse_sexpr(text, instance.keys)
    except TreeError as exc:
        raise UsageError(f"bad tree: {exc}") from None
    result = verify(tree, instance)
    report: dict[str, Any] = {
        "correct": result.correct,
        "irreducible": result.irreducible,
        "ops_legal": result.ops_legal,
        "labels_match": result.labels_match,
        "ok": result.ok,
    }
    if result.correct:
        _cost_fields(report, "cost", cost(tree, instance))
        report["spuler"] = spuler_check(tree, instance)
    report["problems"] = list(result.problems)
    report["_exit"] = EXIT_OK if result.ok else EXIT_INFEASIBLE
    return report


def cmd_oracle(args) -> dict:
    instance = _load(args)
    report: dict[str, Any] = {"n": instance.n, "class": args.tree_class}
    if args.tree_class == "2wcst":
        report["ops"] = format_ops(instance.ops)
        tree, value = brute_2wcst(instance)
        _cost_fields(report, "cost", value)
        report["tree"] = to_sexpr(tree, instance.keys)
    elif args.tree_class == "split":
        _cost_fields(report, "cost", brute_split(instance))
        _cost_fields(report, "solver_cost", optimal_split_tree(instance).cost)
    else:
        _cost_fields(report, "cost", brute_gbst(instance))
    return report


def cmd_gbst_counterexample(args) -> dict:
    weights = counterexample_instance()
    names = sorted(weights)
    started = time.perf_counter()
    value = huang_wong(weights)
    delta = Fraction(99, 100)
    before, after, violated = hw_monotonicity_probe(weights, "d1", delta)
    tree, cheaper = cheaper_counterexample_tree(weights)
    elapsed = time.perf_counter() - started
    if value != before or gbst_cost(tree, weights) != cheaper:
        raise InvariantFailure("counterexample values are inconsistent")
    report: dict[str, Any] = {
        "keys": " ".join(names),
        "weights": " ".join(str(weights[k]) for k in names),
        "huang_wong": _rational(value),
        "raised_key": "d1",
        "raised_by": _rational(delta),
        "huang_wong_raised": _rational(after),
        "huang_wong_raised_decimal": _decimal(after, 2),
        "assertion": "raising one weight never lowers the optimum",
        "violation": violated,
        "cheaper_tree_cost": _rational(cheaper),
        "cheaper_than_huang_wong": cheaper < value,
        "cheaper_tree": to_text(tree, names),
    }
    if args.timing:
        report["seconds"] = f"{elapsed:.3f}"
    return report


def cmd_export_dot(args) -> dict:
    instance = _load(args)
    if args.tree:
        try:
            tree = parse_sexpr(args.tree, instance.keys)
        except TreeError as exc:
            raise UsageError(f"bad tree: {exc}") from None
    else:
        tree = solve(instance).tree
    dot = export_dot(tree, instance.keys)
    if args.dot is None:
        return {"_raw": dot}
    _write_dot(args.dot, dot)
    return {"dot": args.dot, "nodes": dot.count("shape=")}


def random_instance(rng: random.Random, n: int, ops=None, ties: bool = False, keys_only: bool = False) -> Instance:
    """Seeded random instance; ``ties`` draws weights from a tiny range so equal key weights are common."""
    top = 3 if ties else 100
    beta = [Fraction(rng.randint(0, top), rng.choice((1, 2, 3)) if not ties else 1) for _ in range(n)]
    variant = Variant.SUCCESSFUL_ONLY if keys_only else Variant.STANDARD
    alpha = [Fraction(0)] * (n + 1) if keys_only else [Fraction(rng.randint(0, top)) for _ in range(n + 1)]
    if sum(beta) + sum(alpha) == 0:
        beta[0] = Fraction(1)
    return Instance(
        tuple(range(1, n + 1)),
        tuple(beta),
        tuple(alpha),
        frozenset(ops) if ops else frozenset(Op),
        tuple(canonical_queries(n, variant)),
    )


def cmd_gen(args) -> dict:
    rng = random.Random(args.seed)
    n = args.n if args.n is not None else 8
    if n < 1:
        raise UsageError("--n must be at least 1")
    ops = _ops(args.ops) if args.ops else None
    instance = random_instance(rng, n, ops, ties=args.ties, keys_only=args.keys_only)
    return {"_raw": serialize_instance(instance)}


def bench_times(sizes=BENCH_SIZES, seed: int = 0, repeats: int = 3) -> dict[int, float]:
    """Median wall time of ``solve`` per size, on seeded standard instances.

    Repeats are interleaved across sizes so that drift in machine speed hits every size alike.
    """
    instances = {n: random_instance(random.Random(seed * 1000 + n), n) for n in sizes}
    runs: dict[int, list[float]] = {n: [] for n in sizes}
    for _ in range(repeats):
        for n in sizes:
            started = time.perf_counter()
            solve(instances[n])
            runs[n].append(time.perf_counter() - started)
    return {n: statistics.median(runs[n]) for n in sizes}


def cmd_bench(args) -> dict:
    sizes = BENCH_SIZES
    if args.n is not None:
        if args.n < 4:
            raise UsageError("--n must be at least 4")
        sizes = (args.n // 4, args.n // 2, args.n)
    # compile the kernel outside the timed region
    solve(random_instance(random.Random(0), 40))
    times = bench_times(sizes, args.seed, args.repeats)
    report: dict[str, Any] = {}
    for n, t in times.items():
        report[f"seconds_n{n}"] = f"{t:.4f}"
    report["ratio"] = f"{times[sizes[2]] / times[sizes[1]]:.2f}"
    report["ratio_window"] = "8..24"
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twcst", description="Optimal comparison search trees.")
    parser.add_argument("--version", action="version", version=f"twcst {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str, needs_input: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        if needs_input:
            p.add_argument("--input", required=True, metavar="PATH", help="instance file, or - for stdin")
            p.add_argument("--ops", metavar="STR", help="override the allowed operators, e.g. '< ='")
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        return p

    p = command("solve", cmd_solve, "exact optimum")
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--no-equality", action="store_true", help="drop '=' and use the alphabetic reduction")

    p = command("approx", cmd_approx, "additive-3 approximation and entropy bound")
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--exact", action="store_true", help="also report the gap to the exact optimum")

    p = command("verify", cmd_verify, "check a tree against an instance")
    p.add_argument("--tree", required=True, help="tree s-expression, or @PATH")

    p = command("oracle", cmd_oracle, "exhaustive reference optimum (small n)")
    p.add_argument("--class", dest="tree_class", choices=("2wcst", "split", "gbst"), default="2wcst")

    p = command("gbst-counterexample", cmd_gbst_counterexample, "monotonicity counterexample report", False)
    p.add_argument("--timing", action="store_true", help="include wall time (not byte-stable)")

    p = command("export-dot", cmd_export_dot, "DOT text for the optimal (or a given) tree")
    p.add_argument("--dot", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--tree", help="tree s-expression to export instead of solving")

    p = command("bench", cmd_bench, "DP wall time for three sizes", False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, help="largest size; the others are n/4 and n/2")
    p.add_argument("--repeats", type=int, default=3)

    p = command("gen", cmd_gen, "random instance in the file format", False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--ops", metavar="STR")
    p.add_argument("--ties", action="store_true", help="small integer weights with frequent ties")
    p.add_argument("--keys-only", action="store_true", help="successful queries only")
    return parser


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return "; ".join(map(str, value)) if value else "none"
    return str(value)


def render(report: dict, as_json: bool) -> str:
    fields = {k: v for k, v in report.items() if not k.startswith("_")}
    if as_json:
        return json.dumps(fields, indent=2) + "\n"
    return "".join(f"{k}: {_format(v)}\n" for k, v in fields.items())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.handler(args)
    except UsageError as exc:
        print(f"twcst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleLimit as exc:
        print(f"twcst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleInstance as exc:
        print(f"twcst: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvariantFailure, AssertionError) as exc:
        print(f"twcst: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if "_raw" in report:
        sys.stdout.write(report["_raw"])
    else:
        sys.stdout.write(render(report, args.json))
    return report.get("_exit", EXIT_OK)


if __name__ == "__main__":
    raise SystemExit(main())
