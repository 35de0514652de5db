"""Command-line front end: ``pmplan <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import reproduce as repro
from .oracle import SimConfig, simulate_policy
from .planner import Horizon, build_virtual_table, optimal_next_pm, stationary_limit
from .renewal import best_of, cost_constant, selected_costs
from .scenario import (
    EXIT_OK,
    ScenarioError,
    ScenarioFile,
    bundled_path,
    emit_results,
    from_document,
    load_scenario,
    set_value,
)
from .system import SystemModel, SystemSpec, SystemState, pure_cm_monthly_cost

SELECTED_TIMES = (70, 80, 90, 100)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [float(np.round(start + i * step, 12)) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_ages(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, default=None, help="scenario JSON (default: bundled table1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, default=None, help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=20240101)
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--full-precision", action="store_true", help="render floats with full precision")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pmplan", description="Preventive-maintenance planning for aging multi-component systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="optimal next PM plan and the pure-CM comparison")
    p.add_argument("--ages", type=parse_ages, default=None, help="comma-separated component ages")
    p.add_argument("--as-of", type=int, default=None, help="current month s")
    p.add_argument("--mode", choices=("virtual", "naive"), default="virtual")

    p = sub.add_parser("constant", parents=[common], help="long-run cost rate c")
    p.add_argument("--component", default=None, help="stand-alone component instead of the system")

    p = sub.add_parser("virtual-table", parents=[common], help="virtual costs b_a and charges B_a by age")
    p.add_argument("--component", required=True)
    p.add_argument("--max-age", type=int, default=None)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep or planning-start sweep")
    p.add_argument("--parameter", default=None, help="dotted scenario path, e.g. system.components.rotor.value_loss_rate")
    p.add_argument("--grid", type=parse_grid, default=None, help="start:stop:step or a,b,c")
    p.add_argument("--component", default=None, help="sweep the stand-alone component model")
    p.add_argument("--start-times", type=parse_grid, default=None, help="sweep the planning start s (needs --component)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the long-run cost rate")
    p.add_argument("--cycles", type=int, default=100_000)
    p.add_argument("--policy", default="optimal", help="'optimal', 'none' or a PM age in months")
    p.add_argument("--component", default=None, help="simulate one component alone")

    p = sub.add_parser("reproduce", parents=[common], help="reference cases with pass/fail report")
    p.add_argument("case", choices=(*repro.CASES, "all"))
    p.add_argument("--out-dir", type=Path, default=None, help="write rows and checks per case")
    p.add_argument("--rtol", type=float, default=None, help="override the cost tolerance")
    return parser


def _load(args) -> ScenarioFile:
    path = args.scenario or bundled_path("table1")
    return load_scenario(path, args.overrides)


def _sub_spec(spec: SystemSpec, name: str) -> SystemSpec:
    j = spec.index(name)
    return replace(spec, components=(spec.components[j],))


def _component_econ(spec: SystemSpec, name: str):
    if name not in spec.names:
        raise ScenarioError(f"unknown component {name!r}; choose from {list(spec.names)}")
    return spec.economics(spec.index(name))


def cmd_plan(args, sc: ScenarioFile):
    state = sc.state
    if args.ages is not None:
        state = SystemState(args.ages, state.as_of)
    if args.as_of is not None:
        state = SystemState(state.ages, args.as_of)
    if len(state.ages) != sc.system.n:
        raise ScenarioError(f"{len(state.ages)} ages given for {sc.system.n} components")
    sol = SystemModel.build(sc.system).solve(state, mode=args.mode)
    cm = pure_cm_monthly_cost(sc.system, state)
    row = {
        "ages": list(state.ages),
        "as_of": state.as_of,
        "pm_time": sol.pm_time,
        "replace": sol.replace_names,
        "virtual": [sc.system.names[j] for j in sol.virtual],
        "expected_cost": sol.expected_cost,
        "monthly_cost": sol.monthly_cost,
        "cm_monthly_cost": cm,
        "saving": 1.0 - sol.monthly_cost / cm,
    }
    return row


def cmd_constant(args, sc: ScenarioFile):
    spec = sc.system
    if args.component:
        const = cost_constant(_component_econ(spec, args.component), sc.options.get("search_cap"), spec.horizon.end)
        return {"component": args.component, "c": const.value, "argmin_t": const.argmin_t, "no_pm": const.no_pm}
    model = SystemModel.build(spec, max_age=sc.options.get("max_age"))
    const = model.constant
    return {"component": None, "c": const.value, "argmin_t": const.argmin_t, "no_pm": const.no_pm}


def cmd_virtual_table(args, sc: ScenarioFile):
    spec = sc.system
    econ = _component_econ(spec, args.component)
    comp = spec.components[spec.index(args.component)]
    max_age = args.max_age or sc.options.get("max_age")
    return build_virtual_table(econ, Horizon(0, spec.horizon.end), max_age=max_age, pm_cost=comp.pm_cost)


def _component_row(econ, search_cap=None, horizon_end=None) -> dict:
    const = cost_constant(econ, search_cap, horizon_end)
    sel = selected_costs(econ, SELECTED_TIMES)
    row = {"argmin_t": const.argmin_t, "c": const.value}
    row.update({f"q_{t}": sel[t] for t in SELECTED_TIMES})
    row["q_inf"] = sel[None]
    row["best_of_five"] = best_of(sel)
    return row


def cmd_sweep(args, sc: ScenarioFile):
    spec = sc.system
    if args.start_times is not None:
        if not args.component:
            raise ScenarioError("--start-times needs --component")
        econ = _component_econ(spec, args.component)
        T = spec.horizon.end
        const = cost_constant(econ, sc.options.get("search_cap"), T)
        until = stationary_limit(econ, T, const)
        rows = []
        for s in args.start_times:
            s = int(s)
            res = optimal_next_pm(econ, Horizon(s, T), 0, const.value, stationary_t=const.argmin_t)
            rows.append(
                {
                    "s": s,
                    "t_s0": res.pm_time,
                    "shifted": None if const.argmin_t is None else const.argmin_t + s,
                    "stationary": until is not None and s <= until,
                    "near_horizon": res.near_horizon,
                }
            )
        return rows
    sweeps = sc.options.get("sweeps", [])
    parameter, grid = args.parameter, args.grid
    if parameter is None and sweeps:
        parameter, grid = sweeps[0]["parameter"], grid or sweeps[0]["grid"]
    if parameter is None or grid is None:
        raise ScenarioError("sweep needs --parameter and --grid (or options.sweeps in the scenario)")
    rows = []
    for value in grid:
        try:
            doc = set_value(sc.document, parameter, value)
        except KeyError as exc:
            raise ScenarioError(f"unknown parameter: {exc.args[0]}") from exc
        point = from_document(doc)
        row = {"parameter": parameter, "value": value}
        if args.component:
            row.update(_component_row(_component_econ(point.system, args.component), point.options.get("search_cap"), point.system.horizon.end))
        else:
            model = SystemModel.build(point.system, max_age=point.options.get("max_age"))
            sol = model.solve(point.state)
            row.update({"c": model.c, "pm_time": sol.pm_time, "replace": sol.replace_names, "monthly_cost": sol.monthly_cost})
        rows.append(row)
    return rows


def cmd_simulate(args, sc: ScenarioFile):
    spec = _sub_spec(sc.system, args.component) if args.component else sc.system
    model = SystemModel.build(spec, max_age=sc.options.get("max_age"))
    if args.policy == "optimal":
        policy = model.constant.argmin_t
    elif args.policy == "none":
        policy = None
    else:
        policy = int(args.policy)
    report = simulate_policy(spec, SimConfig(args.seed, args.cycles, policy), model.tables)
    analytic = model.c if policy == model.constant.argmin_t else None
    return {
        "policy_t": policy,
        "seed": args.seed,
        "cycles": report.cycles,
        "total_months": report.total_months,
        "avg_cost_per_month": report.avg_cost_per_month,
        "std_error": report.std_error,
        "analytic_c": analytic,
        "z_score": None if analytic is None else (report.avg_cost_per_month - analytic) / report.std_error,
    }


def cmd_reproduce(args, sc: ScenarioFile | None):
    names = list(repro.CASES) if args.case == "all" else [args.case]
    summary = []
    for name in names:
        report = repro.run_case(name, args.rtol)
        print(repro.diff_table(report), file=sys.stderr)
        print(file=sys.stderr)
        if args.out_dir is not None:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"{name}.csv").write_bytes(emit_results(report.rows, "csv", args.full_precision))
            checks = [
                {"check": c.name, "expected": repr(c.expected), "actual": repr(c.actual), "tolerance": c.tolerance, "passed": c.passed}
                for c in report.checks
            ]
            (args.out_dir / f"{name}_checks.json").write_bytes(emit_results(checks, "json", args.full_precision))
        summary.append({"case": name, "passed": report.passed, "checks": len(report.checks), "failed": sum(not c.passed for c in report.checks)})
    return summary


COMMANDS = {
    "plan": cmd_plan,
    "constant": cmd_constant,
    "virtual-table": cmd_virtual_table,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "reproduce": cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = None if args.command == "reproduce" else _load(args)
        result = COMMANDS[args.command](args, sc)
    except ScenarioError as exc:
        print(f"pmplan: {exc}", file=sys.stderr)
        return exc.exit_code
    payload = emit_results(result, args.format, args.full_precision)
    if args.out is not None:
        args.out.write_bytes(payload)
    else:
        sys.stdout.write(payload.decode())
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
