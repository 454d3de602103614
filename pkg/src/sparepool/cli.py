"""Command-line entry point.

Subcommands: ``value`` (one coalition solve), ``game`` (full
characteristic function), ``core`` (least core plus balancedness),
``verify`` (finite-horizon chain checks), ``simulate`` (event simulation
against the solver).  Output is a human table by default or a JSON
report document with ``--format document``.

Exit codes: 0 success, 2 input or validation problem, 3 numerical
non-convergence, 4 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import chain, core, game, mdp, oracle
from .errors import (
    LPError,
    NonConvergenceError,
    ParseError,
    ReducibleChainError,
    SizeCapError,
    ValidationError,
)
from .situation import parse_situation, validation_warnings

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_SIZE = 4


def _load_situation(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    situation = parse_situation(text)
    for note in validation_warnings(situation):
        print(f"warning: {note}", file=sys.stderr)
    return situation


def _parse_coalition(text, situation):
    if text == "all":
        return tuple(range(1, situation.n + 1))
    try:
        members = [int(part) for part in text.split(",")]
    except ValueError:
        raise ValidationError(f"bad coalition selector {text!r}") from None
    from .situation import validate_coalition

    return validate_coalition(situation, members)


def _emit(doc, fmt, table_lines):
    if fmt == "document":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in table_lines:
            print(line)


def _policy_lines(policy):
    lines = []
    for y in range(policy.n_states):
        acc = "".join("A" if b else "-" for b in policy.accept[y])
        rep = "".join("R" if b else "-" for b in policy.repair[y])
        lines.append(f"  y={y}: accept={acc} repair={rep}")
    return lines


def cmd_value(args) -> int:
    situation = _load_situation(args.input)
    members = _parse_coalition(args.coalition, situation)
    result = mdp.average_cost(situation, members, tol=args.tol)
    doc = {
        "coalition": list(members),
        "cost_per_time_unit": result.cost_per_time_unit,
        "cost_per_epoch": result.cost_per_epoch,
        "certified_gap": result.certified_gap,
        "steps": result.steps,
        "policy": {
            "accept": result.policy.accept.tolist(),
            "repair": result.policy.repair.tolist(),
        },
    }
    lines = [
        f"coalition           {','.join(str(i) for i in members)}",
        f"cost_per_time_unit  {result.cost_per_time_unit:.12g}",
        f"cost_per_epoch      {result.cost_per_epoch:.12g}",
        f"certified_gap       {result.certified_gap:.3e}",
        f"steps               {result.steps}",
        "policy:",
        *_policy_lines(result.policy),
    ]
    _emit(doc, args.format, lines)
    return EXIT_OK


def cmd_game(args) -> int:
    situation = _load_situation(args.input)
    built = game.build_game(situation, tol=args.tol)
    doc = built.to_document()
    lines = [f"{'coalition':<12} {'cost':>18} {'gap':>12}"]
    for mask in sorted(built.costs):
        lines.append(f"{game.coalition_label(mask):<12} "
                     f"{built.cost_mask(mask):>18.12g} "
                     f"{built.gap_mask(mask):>12.3e}")
    _emit(doc, args.format, lines)
    return EXIT_OK


def cmd_core(args) -> int:
    if args.game_file is not None:
        with open(args.game_file, "r", encoding="utf-8") as handle:
            built = game.game_from_document(handle.read())
    elif args.input is not None:
        situation = _load_situation(args.input)
        built = game.build_game(situation, tol=args.tol)
    else:
        raise ValidationError("core needs a model document or --game-file")

    eps, allocation = core.least_core(built)
    gap_n = built.gap_mask(built.grand_mask)
    tol_core = args.tol + 10.0 * gap_n
    nonempty = eps <= tol_core
    doc = {
        "epsilon": eps,
        "allocation": allocation.tolist(),
        "core_nonempty": bool(nonempty),
        "tolerance": tol_core,
    }
    lines = [
        f"least-core epsilon  {eps:.12g}",
        f"allocation          {', '.join(f'{x:.12g}' for x in allocation)}",
        f"core_nonempty       {'yes' if nonempty else 'no'} (tolerance {tol_core:.3e})",
    ]
    if built.n <= core.MAX_ENUM_PLAYERS:
        report = core.check_balancedness(built)
        doc["balancedness"] = report.to_document()
        lines.append(f"balanced            {'yes' if report.balanced else 'no'} "
                     f"(tightest slack {report.tightest_slack:.6g})")
        lines.append(f"{'collection':<28} {'slack':>14} {'pass':>6}")
        for row in report.rows:
            label = " | ".join(row.collection.labels())
            lines.append(f"{label:<28} {row.slack:>14.6g} {'yes' if row.passed else 'NO':>6}")
    else:
        lines.append(f"balancedness        skipped (enumeration capped at "
                     f"{core.MAX_ENUM_PLAYERS} players)")
    _emit(doc, args.format, lines)
    return EXIT_OK


def cmd_verify(args) -> int:
    situation = _load_situation(args.input)
    collections = core.enumerate_minimal_balanced(situation.n)
    if args.collection == "all":
        selected = list(enumerate(collections))
    else:
        try:
            index = int(args.collection)
        except ValueError:
            raise ValidationError(
                f"--collection must be 'all' or an index, got {args.collection!r}") from None
        if not 0 <= index < len(collections):
            raise ValidationError(
                f"collection index {index} out of range 0..{len(collections) - 1}")
        selected = [(index, collections[index])]

    reports = []
    lines = []
    for index, collection in selected:
        report = chain.verify_chain(situation, collection, args.t_max,
                                    tol_equality=args.tol)
        reports.append(report.to_document())
        label = " | ".join(collection.labels())
        lines.append(f"collection {index}: {{{label}}} alpha={collection.alpha} "
                     f"weights={list(collection.weights)}")
        lines.append(f"  {'check':<18} {'max_violation':>14} {'pass':>6}")
        for check in report.checks:
            lines.append(f"  {check.check:<18} {check.max_violation:>14.3e} "
                         f"{'yes' if check.passed else 'NO':>6}")
        for name, drift in report.rate_drift.items():
            lines.append(f"  rate drift {name}: {drift:.3e}")
        lines.append(f"  verdict: {'pass' if report.passed else 'FAIL'}")
    _emit(reports, args.format, lines)
    return EXIT_OK


def cmd_simulate(args) -> int:
    situation = _load_situation(args.input)
    members = _parse_coalition(args.coalition, situation)
    solved = mdp.average_cost(situation, members, tol=args.tol)
    result = oracle.simulate(situation, members, solved.policy,
                             min_events=args.events, seed=args.seed)
    covered = result.covers(solved.cost_per_time_unit)
    doc = {
        "simulation": result.to_document(),
        "cost_per_time_unit": solved.cost_per_time_unit,
        "difference": result.estimate - solved.cost_per_time_unit,
        "within_confidence": bool(covered),
    }
    lines = [
        f"estimate            {result.estimate:.12g}",
        f"half_width          {result.half_width:.6g}",
        f"events              {result.events}",
        f"seed                {result.seed}",
        f"solver value        {solved.cost_per_time_unit:.12g}",
        f"difference          {result.estimate - solved.cost_per_time_unit:.6g}",
        f"within_confidence   {'yes' if covered else 'no'}",
    ]
    _emit(doc, args.format, lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparepool",
        description="Spare-parts pooling games: solve, assemble, test stability, verify.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="model document (JSON)")
        p.add_argument("--tol", type=float, default=1e-9,
                       help="solver tolerance per time unit (default 1e-9)")
        p.add_argument("--format", choices=("table", "document"), default="table",
                       help="output format (default table)")

    p_value = sub.add_parser("value", help="solve one coalition")
    common(p_value)
    p_value.add_argument("--coalition", default="all",
                         help="comma-separated ids, or 'all' (default)")
    p_value.set_defaults(func=cmd_value)

    p_game = sub.add_parser("game", help="solve every coalition")
    common(p_game)
    p_game.set_defaults(func=cmd_game)

    p_core = sub.add_parser("core", help="least core and balancedness")
    p_core.add_argument("input", nargs="?", default=None,
                        help="model document (JSON); optional with --game-file")
    p_core.add_argument("--tol", type=float, default=1e-9)
    p_core.add_argument("--format", choices=("table", "document"), default="table")
    p_core.add_argument("--game-file", default=None,
                        help="load a game report document instead of solving")
    p_core.set_defaults(func=cmd_core)

    p_verify = sub.add_parser("verify", help="finite-horizon chain checks")
    common(p_verify)
    p_verify.add_argument("--collection", default="all",
                          help="'all' or the index of one minimal balanced family")
    p_verify.add_argument("--t-max", type=int, default=200, dest="t_max",
                          help="largest horizon to check (default 200)")
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="event simulation against the solver")
    common(p_sim)
    p_sim.add_argument("--coalition", default="all")
    p_sim.add_argument("--events", type=int, default=10 ** 6,
                       help="event count (default 1e6, minimum 1e4)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (NonConvergenceError, LPError, ReducibleChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
