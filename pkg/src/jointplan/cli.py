"""Command-line entry point.

Exit codes: 0 success, 1 infeasible, 2 input error, 3 search limit hit with
an incumbent.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io as jio
from .scenarios import DEFAULT_BUDGETS, budget_sweep, compare_joint_vs_independent, demand_profiles_csv, parse_budgets
from .solver import NODE_LIMIT, TIME_LIMIT, OracleCapExceeded, SolverConfig, branch_and_bound, enumerate_oracle
from .testcase import build_testcase
from .validate import validate

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str):
    try:
        return jio.read_instance(path)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except (jio.FormatError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_valid(path: str):
    return _checked(_read(path), f"{path} is not a valid instance")


def _checked(inst, what: str = "options give an invalid instance"):
    rep = validate(inst)
    if not rep.ok:
        raise InputError(f"{what}:\n{rep}")
    return inst


def _config(args) -> SolverConfig:
    kw = {"seed": args.seed}
    if getattr(args, "gap", None) is not None:
        kw["gap"] = args.gap
    if getattr(args, "time_limit", None) is not None:
        kw["time_limit"] = args.time_limit
    try:
        return SolverConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _objective_options(inst, args):
    if args.lam is not None:
        inst = inst.with_lambda(args.lam)
    if args.normalize_objective:
        inst = replace(inst, normalize_objective=True)
    return _checked(inst)


def _solution_code(status: str, feasible: bool) -> int:
    if not feasible:
        return EXIT_INFEASIBLE
    if status in (NODE_LIMIT, TIME_LIMIT):
        return EXIT_LIMIT
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _read(args.file)
    rep = validate(inst)
    if rep.ok:
        print(f"{args.file}: ok")
        return EXIT_OK
    print(str(rep))
    return EXIT_INPUT


def cmd_plan(args) -> int:
    inst = _read_valid(args.file)
    if args.budget is not None:
        inst = _checked(inst.with_budget(args.budget))
    inst = _objective_options(inst, args)
    config = _config(args)
    try:
        sol = (enumerate_oracle if args.oracle else branch_and_bound)(inst, config)
    except OracleCapExceeded as exc:
        raise InputError(str(exc)) from exc
    _emit(sol.to_json() + "\n", args.out)
    return _solution_code(sol.status, sol.feasible)


def cmd_sweep(args) -> int:
    inst = _read_valid(args.file)
    try:
        budgets = parse_budgets(args.budgets)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        res = budget_sweep(_objective_options(inst, args), budgets, config=_config(args), oracle=args.oracle)
    except OracleCapExceeded as exc:
        raise InputError(str(exc)) from exc
    _emit(res.to_csv(timing=args.timing), args.out)
    if any(r.status in (NODE_LIMIT, TIME_LIMIT) for r in res.rows):
        return EXIT_LIMIT
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = _read_valid(args.file)
    rep = compare_joint_vs_independent(inst, args.power_target, args.water_target, _config(args))
    _emit(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK if rep.status == "ok" else EXIT_INFEASIBLE


def cmd_testcase(args) -> int:
    inst = build_testcase(args.experiment)
    jio.write_instance(inst, args.out)
    if args.profiles:
        Path(args.profiles).write_text(demand_profiles_csv(inst), encoding="utf-8", newline="")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jointplan", description="Joint power and water network expansion planning.")
    p.add_argument("-v", "--verbose", action="store_true", help="log one line per search node to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check an instance file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    def objective_opts(s):
        s.add_argument("--lambda", type=float, dest="lam", help="weight of served power (water gets 1 - lambda)")
        s.add_argument("--normalize-objective", action="store_true", dest="normalize_objective",
                       help="divide each demand term by its largest hourly total")

    def solver_opts(s):
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--gap", type=float)
        s.add_argument("--time-limit", type=float, dest="time_limit")
        s.add_argument("--out", help="output file (default: stdout)")

    s = sub.add_parser("plan", help="solve one instance")
    s.add_argument("file")
    s.add_argument("--budget", type=float)
    objective_opts(s)
    s.add_argument("--oracle", action="store_true", help="exhaustive enumeration instead of branch-and-bound")
    solver_opts(s)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("sweep", help="solve over a budget grid and write CSV")
    s.add_argument("file")
    s.add_argument("--budgets", default=DEFAULT_BUDGETS, help="a:b:step (default %(default)s)")
    objective_opts(s)
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--timing", action="store_true", help="fill the seconds column")
    solver_opts(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("compare", help="joint versus independent minimum-cost planning")
    s.add_argument("file")
    s.add_argument("--power-target", type=float, dest="power_target", help="peak-hour power in MW")
    s.add_argument("--water-target", type=float, dest="water_target", help="peak-hour water in L/s")
    solver_opts(s)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("testcase", help="write the demonstration instance")
    s.add_argument("--out", required=True)
    s.add_argument("--experiment", type=int, choices=(1, 2), default=1)
    s.add_argument("--profiles", help="also write hourly demand profiles as CSV")
    s.set_defaults(func=cmd_testcase)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
