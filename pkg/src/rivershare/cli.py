"""Command-line interface.

Subcommands: allocate, compare, rationalize, axioms-check, axioms-search,
characterize, reproduce-nile, generate.  All results go to stdout;
diagnostics go to stderr.  Exit codes: 0 success, 1 domain error (infeasible
observation, invalid network, ...), 2 usage error.  ``axioms-search`` and
``axioms-check`` exit 0 whether or not a witness turns up, because a witness
is a result, not a failure; ``--fail-on-witness`` flips that.

Rule grammar for ``--rule``: ``no-transfer``, ``full-transfer``,
``geometric:<q>``, ``multi:<q,...,q>``, ``serial``, ``beta:<k>:<q>``,
``delta:<q,...,q>``, ``lambda:<q>``, where ``<q>`` is a decimal or ``p/q``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .axioms import (
    AxiomId,
    ProblemSampler,
    SuiteReport,
    Witness,
    characterize_geometric,
    run_axiom_suite,
    search_counterexamples,
)
from .core import Allocation, MixedNetworks, ParseError, RiverShareError, quantity
from .data import (
    BasinDataset,
    emit_problem,
    emit_table,
    format_decimal,
    nile_dataset,
    parse_problem,
)
from .rationalize import fit_gamma, rationalize_alpha, scale_withdrawals
from .reproduction import build_nile_report, render
from .rules import (
    AdditiveDelta,
    Beta,
    FullTransfer,
    Geometric,
    Lambda,
    MultiGeometric,
    NoTransfer,
    RuleSpec,
    Serial,
    evaluate,
    rule_name,
)


def parse_rule_text(text: str) -> RuleSpec:
    """Parse the ``--rule`` grammar into a rule spec."""
    try:
        head, _, rest = text.partition(":")
        if head == "no-transfer" and not rest:
            return NoTransfer()
        if head == "full-transfer" and not rest:
            return FullTransfer()
        if head == "serial" and not rest:
            return Serial()
        if head == "geometric" and rest:
            return Geometric(quantity(rest))
        if head == "lambda" and rest:
            return Lambda(quantity(rest))
        if head == "multi" and rest:
            return MultiGeometric(tuple(quantity(q) for q in rest.split(",")))
        if head == "delta" and rest:
            return AdditiveDelta(tuple(quantity(q) for q in rest.split(",")))
        if head == "beta" and rest:
            pivot_text, _, retain_text = rest.partition(":")
            if not retain_text:
                raise ParseError("beta takes a pivot and a retention: beta:<k>:<q>")
            return Beta(int(pivot_text), quantity(retain_text))
    except RiverShareError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    raise argparse.ArgumentTypeError(
        f"unknown rule {text!r}; see --help for the rule grammar"
    )


def parse_axiom_text(text: str) -> AxiomId:
    try:
        return AxiomId.from_string(text)
    except RiverShareError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def load_dataset(spec: str) -> BasinDataset:
    """Resolve ``--problem``: the built-in ``nile`` alias or a file path."""
    if spec == "nile":
        return nile_dataset()
    path = Path(spec)
    if path.suffix.lower() == ".csv":
        fmt = "csv"
    elif path.suffix.lower() == ".json":
        fmt = "json"
    else:
        raise ParseError(f"cannot tell the format of {spec!r}; use .csv or .json")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {spec!r}: {exc}") from exc
    return parse_problem(text, fmt)


def resolve_observed(dataset: BasinDataset, spec: str) -> tuple[Fraction, ...]:
    """Resolve ``--observed``: scaled withdrawals, raw withdrawals, or a file."""
    if spec in ("scaled", "raw"):
        if dataset.raw_withdrawals is None:
            raise ParseError("the problem carries no withdrawal column")
        if spec == "raw":
            return dataset.raw_withdrawals
        total = sum(dataset.inflows, Fraction(0))
        return scale_withdrawals(dataset.raw_withdrawals, total)
    other = load_dataset(spec)
    if other.raw_withdrawals is None:
        raise ParseError(f"{spec!r} carries no withdrawal column")
    if other.network != dataset.network:
        raise MixedNetworks(
            "the observed file's network differs from the problem's"
        )
    return other.raw_withdrawals


# ---------------------------------------------------------------------------
# Witness rendering
# ---------------------------------------------------------------------------

def _witness_json(witness: Witness) -> dict:
    return {
        "axiom": witness.axiom.value,
        "agents": list(witness.agents),
        "lhs": str(witness.lhs),
        "rhs": str(witness.rhs),
        "params": {key: str(value) for key, value in witness.params},
        "problems": [
            {
                "successors": list(p.network.successors),
                "inflows": [str(e) for e in p.inflows],
            }
            for p in witness.problems
        ],
    }


def _witness_text(witness: Witness, decimals: int) -> list[str]:
    lines = [
        f"  axiom:  {witness.axiom.value}",
        f"  agents: {', '.join(str(a) for a in witness.agents)}",
        f"  lhs:    {witness.lhs} ({format_decimal(witness.lhs, decimals)})",
        f"  rhs:    {witness.rhs} ({format_decimal(witness.rhs, decimals)})",
    ]
    for key, value in witness.params:
        lines.append(f"  {key}: {value}")
    for idx, p in enumerate(witness.problems):
        inflows = ", ".join(str(e) for e in p.inflows)
        lines.append(f"  problem[{idx}] inflows: ({inflows})")
    return lines


def _suite_json(command: str, args, suite: SuiteReport) -> dict:
    return {
        "command": command,
        "rule": args.rule_text,
        "axiom": suite.axiom.value,
        "seed": args.seed,
        "budget": args.budget,
        "tested": suite.tested,
        "skipped": suite.skipped,
        "witness": _witness_json(suite.witness) if suite.witness else None,
    }


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------

def _cmd_allocate(args) -> int:
    dataset = load_dataset(args.problem)
    problem = dataset.problem()
    allocation = evaluate(args.rule, problem)
    sys.stdout.write(
        emit_table(
            problem.network,
            [(rule_name(args.rule), allocation)],
            fmt=args.format,
            decimals=args.decimals,
        )
    )
    return 0


def _cmd_compare(args) -> int:
    dataset = load_dataset(args.problem)
    problem = dataset.problem()
    rows = [("e", problem.inflows)]
    for rule in args.rules:
        rows.append((rule_name(rule), evaluate(rule, problem).amounts))
    sys.stdout.write(
        emit_table(problem.network, rows, fmt=args.format, decimals=args.decimals)
    )
    return 0


def _cmd_rationalize(args) -> int:
    dataset = load_dataset(args.problem)
    problem = dataset.problem()
    observed = Allocation(resolve_observed(dataset, args.observed))
    result = rationalize_alpha(problem, observed)
    fit = fit_gamma(problem, observed)
    net = problem.network
    if args.format == "json":
        doc = {
            "command": "rationalize",
            "problem": args.problem,
            "observed": args.observed,
            "agents": [net.label_of(i) for i in net.agents],
            "alpha_exact": [str(a) for a in result.alpha],
            "alpha_rounded": [
                format_decimal(a, args.decimals) for a in result.alpha
            ],
            "flags": list(result.flags),
            "disposable": [str(d) for d in result.disposable],
            "uniform_fit": {
                "gamma": fit.gamma,
                "loss": fit.loss,
                "iterations": fit.iterations,
            },
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0
    lines = []
    header = ("agent", "retention", "exact", "flag")
    rows = [header]
    for i in net.agents:
        rows.append(
            (
                net.label_of(i),
                format_decimal(result.alpha[i - 1], args.decimals),
                str(result.alpha[i - 1]),
                result.flags[i - 1],
            )
        )
    if args.format == "csv":
        lines.extend(",".join(row) for row in rows)
    else:
        widths = [max(len(r[j]) for r in rows) for j in range(len(header))]
        for row in rows:
            lines.append(
                "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            )
        lines.append(
            f"best uniform retention {fit.gamma:.6f} "
            f"(loss {fit.loss:.6f}, {fit.iterations} evaluations)"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _make_sampler(args) -> ProblemSampler:
    n_range = (args.n, args.n) if getattr(args, "n", None) else (3, 8)
    return ProblemSampler(seed=args.seed, n_range=n_range)


def _cmd_axioms_check(args) -> int:
    dataset = load_dataset(args.problem)
    problem = dataset.problem()
    sampler = ProblemSampler(seed=args.seed)
    suite = run_axiom_suite(
        args.rule, args.axiom, sampler, instances=args.budget, problem=problem
    )
    if args.format == "json":
        sys.stdout.write(
            json.dumps(_suite_json("axioms-check", args, suite), indent=2) + "\n"
        )
    else:
        sys.stdout.write(
            f"rule {args.rule_text}, axiom {args.axiom.value}, "
            f"problem {args.problem}: checked {suite.tested}, "
            f"skipped {suite.skipped}\n"
        )
        if suite.witness is None:
            sys.stdout.write("no witness found\n")
        else:
            sys.stdout.write("witness found:\n")
            sys.stdout.write("\n".join(_witness_text(suite.witness, args.decimals)) + "\n")
    if suite.witness is not None and args.fail_on_witness:
        return 1
    return 0


def _cmd_axioms_search(args) -> int:
    sampler = _make_sampler(args)
    witness = search_counterexamples(args.rule, args.axiom, sampler, args.budget)
    if args.format == "json":
        doc = {
            "command": "axioms-search",
            "rule": args.rule_text,
            "axiom": args.axiom.value,
            "seed": args.seed,
            "budget": args.budget,
            "witness": _witness_json(witness) if witness else None,
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    elif witness is None:
        sys.stdout.write(
            f"no witness for {args.axiom.value} against {args.rule_text} "
            f"in {args.budget} instances (seed {args.seed})\n"
        )
    else:
        sys.stdout.write(f"witness for {args.axiom.value} against {args.rule_text}:\n")
        sys.stdout.write("\n".join(_witness_text(witness, args.decimals)) + "\n")
    if witness is not None and args.fail_on_witness:
        return 1
    return 0


def _cmd_characterize(args) -> int:
    sampler = ProblemSampler(seed=args.seed)
    result = characterize_geometric(args.rule, args.n, sampler, args.budget)
    if args.format == "json":
        doc = {
            "command": "characterize",
            "rule": args.rule_text,
            "n": args.n,
            "seed": args.seed,
            "budget": args.budget,
            "member": result.member,
            "alpha_exact": [str(a) for a in result.alpha],
            "alpha_rounded": [format_decimal(a, args.decimals) for a in result.alpha],
        }
        if not result.member:
            assert result.counterexample is not None
            doc["counterexample"] = {
                "inflows": [str(e) for e in result.counterexample.inflows],
                "agent": result.agent,
                "rule_value": str(result.actual),
                "candidate_value": str(result.expected),
            }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0
    alpha = ", ".join(str(a) for a in result.alpha)
    if result.member:
        sys.stdout.write(
            f"{args.rule_text} behaves as a geometric-transfer rule on "
            f"{args.n} agents with retentions ({alpha})\n"
        )
    else:
        assert result.counterexample is not None
        inflows = ", ".join(str(e) for e in result.counterexample.inflows)
        sys.stdout.write(
            f"{args.rule_text} is not a geometric-transfer rule on {args.n} "
            f"agents\ncandidate retentions: ({alpha})\n"
            f"disagreement on inflows ({inflows}) at agent {result.agent}: "
            f"rule gives {result.actual}, candidate gives {result.expected}\n"
        )
    return 0


def _cmd_reproduce_nile(args) -> int:
    report = build_nile_report()
    sys.stdout.write(render(report, fmt=args.format, decimals=args.decimals))
    return 0


def _cmd_generate(args) -> int:
    sampler = _make_sampler(args)
    problem = sampler.problem(args.n if args.n else None)
    dataset = BasinDataset(problem.network, problem.inflows)
    fmt = "json" if args.format == "json" else "csv"
    sys.stdout.write(emit_problem(dataset, fmt))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rivershare",
        description="exact water-rights allocation on river networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, seeded: bool = False) -> None:
        p.add_argument(
            "--format", choices=("text", "csv", "json"), default="text"
        )
        p.add_argument("--decimals", type=int, default=2)
        if seeded:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--budget", type=int, default=1000)
            p.add_argument("--fail-on-witness", action="store_true")

    p = sub.add_parser("allocate", help="evaluate one rule on a problem")
    p.add_argument("--rule", type=parse_rule_text, required=True)
    p.add_argument("--problem", default="nile")
    common(p)
    p.set_defaults(handler=_cmd_allocate)

    p = sub.add_parser("compare", help="tabulate several rules side by side")
    p.add_argument(
        "--rule", type=parse_rule_text, action="append", required=True, dest="rules"
    )
    p.add_argument("--problem", default="nile")
    common(p)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser(
        "rationalize", help="recover retentions explaining an observed allocation"
    )
    p.add_argument("--problem", default="nile")
    p.add_argument("--observed", default="scaled")
    common(p)
    p.set_defaults(handler=_cmd_rationalize)

    p = sub.add_parser(
        "axioms-check", help="check one axiom on a fixed problem with seeded perturbations"
    )
    p.add_argument("--rule", type=parse_rule_text, required=True)
    p.add_argument("--axiom", type=parse_axiom_text, required=True)
    p.add_argument("--problem", default="nile")
    common(p, seeded=True)
    p.set_defaults(handler=_cmd_axioms_check)

    p = sub.add_parser(
        "axioms-search", help="search seeded random instances for a counterexample"
    )
    p.add_argument("--rule", type=parse_rule_text, required=True)
    p.add_argument("--axiom", type=parse_axiom_text, required=True)
    p.add_argument("--n", type=int, default=None, help="fix the agent count")
    common(p, seeded=True)
    p.set_defaults(handler=_cmd_axioms_search)

    p = sub.add_parser(
        "characterize",
        help="test whether a rule is a geometric-transfer rule",
    )
    p.add_argument("--rule", type=parse_rule_text, required=True)
    p.add_argument("--n", type=int, required=True)
    common(p, seeded=True)
    p.set_defaults(handler=_cmd_characterize)

    p = sub.add_parser(
        "reproduce-nile", help="recompute and check the published Nile table"
    )
    common(p)
    p.set_defaults(handler=_cmd_reproduce_nile)

    p = sub.add_parser("generate", help="emit a seeded random problem document")
    p.add_argument("--n", type=int, default=None)
    common(p, seeded=True)
    p.set_defaults(handler=_cmd_generate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "rule"):
        args.rule_text = rule_name(args.rule)
    try:
        return args.handler(args)
    except RiverShareError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
