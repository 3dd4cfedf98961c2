"""Command-line front end.

Subcommands
-----------
run       simulate a preset or a JSON scenario file, write the trajectory CSV
compare   run a controller pair and report time-to-settle for each
validate  run a named property suite with fixed seeds
presets   list the bundled scenarios

Exit codes: 0 success, 1 usage/configuration error or failed validation,
2 divergence detected (so scripted checks can assert instability).

The trajectory CSV has one header row naming the columns
``t, theta_1..n, theta_hat_1..n, y, U_1..n, Hhat_11..nn, Gamma_11..nn``;
values carry full double precision. The default output directory is the
``ESCKIT_OUT_DIR`` environment variable, falling back to the working
directory.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .metrics import final_window_stats, time_to_band
from .presets import COMPARE_PAIRS, Scenario, get_preset, preset_names
from .simulator import Trajectory
from .validation import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGED = 2


def write_trajectory_csv(traj: Trajectory, path) -> None:
    np.savetxt(path, traj.data, delimiter=",", fmt="%.17g",
               header=",".join(traj.columns), comments="")


def read_trajectory_csv(path, n: int) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data=data, n=n)


def _out_path(explicit, default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    base = Path(os.environ.get("ESCKIT_OUT_DIR", "."))
    return base / default_name


def _parse_override(text: str):
    if "=" not in text:
        raise ConfigurationError(
            f"override {text!r} must look like section.key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _resolve_scenario(args) -> Scenario:
    if args.preset and args.config:
        raise ConfigurationError("give either --preset or --config, not both")
    if args.preset:
        sc = get_preset(args.preset)
    elif args.config:
        sc = Scenario.load(args.config)
    else:
        raise ConfigurationError("one of --preset or --config is required")
    overrides = {}
    if args.seed is not None:
        overrides["sim.seed"] = args.seed
    for item in args.override or []:
        key, value = _parse_override(item)
        overrides[key] = value
    if overrides:
        sc = sc.with_overrides(overrides)
    return sc


def _summarize(name: str, sc: Scenario, traj: Trajectory) -> None:
    y_err, th_err = final_window_stats(traj, sc.qmap.theta_star, sc.qmap.y_star)
    print(f"{name}: controller={sc.sim.controller.value} seed={sc.sim.seed}")
    if traj.divergence is not None:
        t_ev, reason = traj.divergence
        print(f"  divergence at t={t_ev:.2f} s: {reason}")
    else:
        print(f"  final-window |y - y*|      = {y_err:.4f}")
        print(f"  final-window |theta-theta*| = {th_err:.4f} (max norm)")


def cmd_run(args) -> int:
    sc = _resolve_scenario(args)
    if args.save_config:
        sc.save(args.save_config)
    traj = sc.run()
    out = _out_path(args.out, f"{sc.name}.csv")
    write_trajectory_csv(traj, out)
    _summarize(sc.name, sc, traj)
    print(f"  trajectory written to {out}")
    return EXIT_DIVERGED if traj.divergence is not None else EXIT_OK


def cmd_compare(args) -> int:
    if args.pair:
        if args.pair not in COMPARE_PAIRS:
            raise ConfigurationError(
                f"unknown pair {args.pair!r}; available: "
                f"{', '.join(sorted(COMPARE_PAIRS))}")
        names = COMPARE_PAIRS[args.pair]
    else:
        names = tuple(p.strip() for p in args.presets.split(","))
        if len(names) != 2:
            raise ConfigurationError("--presets needs exactly two names")
    scenarios = []
    for nm in names:
        sc = get_preset(nm)
        if args.seed is not None:
            sc = sc.with_overrides({"sim.seed": args.seed})
        scenarios.append(sc)
    trajs = [sc.run() for sc in scenarios]

    diverged = False
    for sc, traj in zip(scenarios, trajs):
        _summarize(sc.name, sc, traj)
        settle = time_to_band(traj, sc.qmap.y_star)
        print(f"  time to reach and stay within 5% of y*: "
              f"{'never' if settle == float('inf') else f'{settle:.1f} s'}")
        diverged = diverged or traj.divergence is not None

    rows = min(t.data.shape[0] for t in trajs)
    joined = np.hstack([trajs[0].data[:rows, :1]]
                       + [t.data[:rows, 1:] for t in trajs])
    cols = ["t"]
    for sc, t in zip(scenarios, trajs):
        cols += [f"{c}_{sc.name}" for c in t.columns[1:]]
    out = _out_path(args.out, f"compare_{names[0]}_vs_{names[1]}.csv")
    np.savetxt(out, joined, delimiter=",", fmt="%.17g",
               header=",".join(cols), comments="")
    print(f"joined trajectories written to {out}")
    return EXIT_DIVERGED if diverged else EXIT_OK


def cmd_validate(args) -> int:
    results, ok = run_suite(args.suite)
    for r in results:
        print(r.line())
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'} "
          f"({sum(r.passed for r in results)}/{len(results)} checks)")
    return EXIT_OK if ok else EXIT_USAGE


def cmd_presets(_args) -> int:
    for name in preset_names():
        sc = get_preset(name)
        print(f"{name:15s} {sc.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="esckit",
        description="Stochastic Newton extremum seeking with input-delay "
                    "compensation: simulation runs, controller comparisons, "
                    "and validation suites.")
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="simulate one scenario")
    runp.add_argument("--preset", help="bundled scenario name")
    runp.add_argument("--config", help="path to a scenario JSON file")
    runp.add_argument("--out", help="trajectory CSV path")
    runp.add_argument("--seed", type=int, help="override the master seed")
    runp.add_argument("--override", action="append", metavar="KEY=VALUE",
                      help="dotted-path override, e.g. sim.t_end=500")
    runp.add_argument("--save-config", help="write the resolved scenario JSON")
    runp.set_defaults(func=cmd_run)

    cmpp = sub.add_parser("compare", help="run a controller pair")
    cmpp.add_argument("--pair", help="bundled pair: "
                      + ", ".join(sorted(COMPARE_PAIRS)))
    cmpp.add_argument("--presets", help="two preset names, comma separated")
    cmpp.add_argument("--out", help="joined CSV path")
    cmpp.add_argument("--seed", type=int, help="override the master seed")
    cmpp.set_defaults(func=cmd_compare)

    valp = sub.add_parser("validate", help="run a property suite")
    valp.add_argument("suite", choices=sorted(SUITES))
    valp.set_defaults(func=cmd_validate)

    prep = sub.add_parser("presets", help="list bundled scenarios")
    prep.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
