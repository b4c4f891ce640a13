"""Batch command-line front end over JSON files.

Commands: validate | interact | maxprob | game-value | coinflip |
export-sdpa | fixtures | report.  One JSON payload per invocation on stdout
(canonical form: sorted keys, 12-significant-digit floats), diagnostics on
stderr.  Exit codes: 0 success, 2 validation failure (residuals in the
payload), 1 usage or model errors.  QSTRAT_SEED overrides the seed used by
the fixtures command.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import QstratError, ValidationFailedError
from .games import (
    build_forced_problem,
    build_game_problem,
    coinflip_analyze,
    game_value,
    max_forced_output,
)
from .interaction import distribution_via_reps, ensure_measuring, simulate_interaction
from .sdp import export_sdpa, parse_sdpa
from .serialize import (
    dumps_canonical,
    profile_from_json,
    rep_from_json,
    rep_to_json,
    referee_from_json,
    strategy_description_from_json,
    costrategy_description_from_json,
    matrix_from_json,
)
from .strategy import represent_costrategy, represent_strategy, validate
from .tensor import HermOp

DEFAULT_SEED = 20260810


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def cmd_validate(args) -> tuple[int, dict]:
    profile = profile_from_json(_load(args.profile))
    matrix = matrix_from_json(_load(args.rep), "rep")
    op = HermOp(profile.rep_space(), matrix)
    report = validate(op, profile, args.kind, tol=args.tol)
    return (0 if report.valid else 2), report.to_json_dict()


def cmd_interact(args) -> tuple[int, dict]:
    sdesc = strategy_description_from_json(_load(args.strategy))
    cdesc = costrategy_description_from_json(_load(args.costrategy))
    payload: dict = {"method": args.method}
    dists = {}
    if args.method in ("reps", "both"):
        srep = ensure_measuring(represent_strategy(sdesc))
        crep = ensure_measuring(represent_costrategy(cdesc))
        dists["via_reps"] = distribution_via_reps(srep, crep)
    if args.method in ("simulate", "both"):
        dists["simulated"] = simulate_interaction(sdesc, cdesc)
    for key, dist in dists.items():
        payload[key] = dist.to_json_dict()
    if args.method == "both":
        payload["max_gap"] = dists["via_reps"].max_gap(dists["simulated"])
    return 0, payload


def cmd_maxprob(args) -> tuple[int, dict]:
    rep = ensure_measuring(rep_from_json(_load(args.measuring_rep)))
    directions = ["primal", "dual"] if args.direction == "both" else [args.direction]
    results = {d: max_forced_output(rep, args.outcome, d) for d in directions}
    chosen = results[directions[-1]]
    witness_path = os.path.splitext(args.measuring_rep)[0] + ".witness.json"
    with open(witness_path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(rep_to_json(chosen.witness)))
        fh.write("\n")
    payload = {
        "direction": args.direction,
        "outcome": args.outcome,
        "probability": chosen.probability,
        "witness_path": witness_path,
        "results": {d: r.to_json_dict() for d, r in results.items()},
    }
    if len(results) == 2:
        payload["agreement_gap"] = abs(
            results["primal"].probability - results["dual"].probability
        )
    return 0, payload


def cmd_game_value(args) -> tuple[int, dict]:
    ref = referee_from_json(_load(args.referee))
    payload: dict = {}
    if args.export_sdpa:
        problem, _, _, _ = build_game_problem(ref)
        text = export_sdpa(problem)
        with open(args.export_sdpa, "w", encoding="utf-8") as fh:
            fh.write(text)
        payload["sdpa_path"] = args.export_sdpa
    if args.no_solve:
        if not args.export_sdpa:
            raise QstratError("--no-solve requires --export-sdpa")
        return 0, payload
    result = game_value(ref)
    payload.update(result.to_json_dict())
    if args.swap_roles:
        swapped = game_value(ref.swapped())
        payload["maximin"] = result.value
        payload["minimax"] = -swapped.value
        payload["swap_agreement_gap"] = abs(result.value - (-swapped.value))
    return 0, payload


def cmd_coinflip(args) -> tuple[int, dict]:
    alice = ensure_measuring(rep_from_json(_load(args.alice)))
    bob = ensure_measuring(rep_from_json(_load(args.bob)))
    report = coinflip_analyze(alice, bob)
    return 0, report.to_json_dict()


def cmd_export_sdpa(args) -> tuple[int, dict]:
    if args.referee:
        problem, _, _, _ = build_game_problem(referee_from_json(_load(args.referee)))
    else:
        rep = ensure_measuring(rep_from_json(_load(args.measuring_rep)))
        problem, _ = build_forced_problem(rep, args.outcome, args.direction)
    text = export_sdpa(problem)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    real = parse_sdpa(text)
    return 0, {"sdpa_path": args.out, "rows": real.m, "blocks": len(real.block_sides)}


def cmd_fixtures(args) -> tuple[int, dict]:
    from .fixtures import write_fixtures

    seed = int(os.environ.get("QSTRAT_SEED", str(args.seed)))
    written = write_fixtures(args.out_dir, seed)
    return 0, {"out_dir": args.out_dir, "seed": seed, "written": written}


def cmd_report(args) -> tuple[int, dict]:
    from . import report as report_mod

    if args.mode == "interact":
        sdesc = strategy_description_from_json(_load(args.strategy))
        cdesc = costrategy_description_from_json(_load(args.costrategy))
        dists = {
            "via_reps": distribution_via_reps(
                ensure_measuring(represent_strategy(sdesc)),
                ensure_measuring(represent_costrategy(cdesc)),
            ),
            "simulated": simulate_interaction(sdesc, cdesc),
        }
        files = report_mod.render_interact(dists, args.out_dir)
    elif args.mode == "coinflip":
        alice = ensure_measuring(rep_from_json(_load(args.alice)))
        bob = ensure_measuring(rep_from_json(_load(args.bob)))
        files = report_mod.render_coinflip(coinflip_analyze(alice, bob), args.out_dir)
    else:
        ref = referee_from_json(_load(args.referee))
        result = game_value(ref)
        minmax = None
        if args.swap_roles:
            minmax = (result.value, -game_value(ref.swapped()).value)
        files = report_mod.render_game(result, args.out_dir, minmax)
    return 0, {"out_dir": args.out_dir, "files": files}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qstrat",
        description="representations of multi-round quantum strategies and the "
                    "optimization problems they induce",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an operator against the constraint system")
    p.add_argument("--rep", required=True, help="matrix JSON file")
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--kind", required=True, choices=["strategy", "costrategy"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("interact", help="joint outcome distribution of a pair")
    p.add_argument("--strategy", required=True, help="strategy description JSON")
    p.add_argument("--costrategy", required=True, help="co-strategy description JSON")
    p.add_argument("--method", choices=["reps", "simulate", "both"], default="both")
    p.set_defaults(handler=cmd_interact)

    p = sub.add_parser("maxprob", help="maximum forced-output probability")
    p.add_argument("--measuring-rep", required=True, help="measuring representation JSON")
    p.add_argument("--outcome", required=True)
    p.add_argument("--direction", choices=["primal", "dual", "both"], default="both")
    p.set_defaults(handler=cmd_maxprob)

    p = sub.add_parser("game-value", help="value of a zero-sum refereed game")
    p.add_argument("--referee", required=True, help="referee JSON file")
    p.add_argument("--swap-roles", action="store_true",
                   help="also solve from the other seat and report agreement")
    p.add_argument("--export-sdpa", metavar="PATH", default=None)
    p.add_argument("--no-solve", action="store_true")
    p.set_defaults(handler=cmd_game_value)

    p = sub.add_parser("coinflip", help="coin-flipping protocol analysis")
    p.add_argument("--alice", required=True, help="Alice's measuring representation JSON")
    p.add_argument("--bob", required=True, help="Bob's measuring representation JSON")
    p.set_defaults(handler=cmd_coinflip)

    p = sub.add_parser("export-sdpa", help="write a problem in SDPA sparse format")
    p.add_argument("--referee", default=None)
    p.add_argument("--measuring-rep", default=None)
    p.add_argument("--outcome", default=None)
    p.add_argument("--direction", choices=["primal", "dual"], default="dual")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_export_sdpa)

    p = sub.add_parser("fixtures", help="write the shipped fixture files")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(handler=cmd_fixtures)

    p = sub.add_parser("report", help="render CSV and figure reports")
    p.add_argument("mode", choices=["interact", "coinflip", "game"])
    p.add_argument("--strategy")
    p.add_argument("--costrategy")
    p.add_argument("--alice")
    p.add_argument("--bob")
    p.add_argument("--referee")
    p.add_argument("--swap-roles", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_report)

    return parser


def _check_args(args) -> str | None:
    if args.command == "export-sdpa":
        if bool(args.referee) == bool(args.measuring_rep):
            return "export-sdpa needs exactly one of --referee or --measuring-rep"
        if args.measuring_rep and not args.outcome:
            return "export-sdpa with --measuring-rep needs --outcome"
    if args.command == "report":
        needed = {"interact": ["strategy", "costrategy"],
                  "coinflip": ["alice", "bob"],
                  "game": ["referee"]}[args.mode]
        for name in needed:
            if getattr(args, name) is None:
                return f"report {args.mode} needs --{name}"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    usage_error = _check_args(args)
    if usage_error:
        print(dumps_canonical({"error": {"kind": "usage", "message": usage_error}}))
        print(f"error: {usage_error}", file=sys.stderr)
        return 1
    try:
        code, payload = args.handler(args)
    except json.JSONDecodeError as exc:
        payload = {"error": {"kind": "parse", "message": exc.msg,
                             "line": exc.lineno, "column": exc.colno}}
        print(dumps_canonical(payload))
        print(f"error: malformed JSON at line {exc.lineno}, column {exc.colno}",
              file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        payload = {"error": {"kind": "io", "message": str(exc)}}
        print(dumps_canonical(payload))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationFailedError as exc:
        payload = {"error": {"kind": "validation", "message": str(exc)}}
        if exc.report is not None:
            payload["report"] = exc.report.to_json_dict()
        print(dumps_canonical(payload))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QstratError as exc:
        payload = {"error": {"kind": type(exc).__name__, "message": str(exc)}}
        print(dumps_canonical(payload))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(dumps_canonical(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
