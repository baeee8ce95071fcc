"""Command line entry point: run scenarios, replay scan logs, report metrics."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .database import TreeDatabase
from .runner import MissionAbort, ParseError, diameter_metrics, replay, run_scenario
from .scenario import ConfigError, load_scenario


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.steps is not None:
        overrides["duration"] = args.steps * scenario.dt
    if args.search is not None:
        overrides["search"] = dataclasses.replace(scenario.search, method=args.search)
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
    report = run_scenario(scenario, args.out)
    print(f"steps={report.steps} scans={report.scans} visited={report.visited} "
          f"phase={report.phase} trees={len(report.db)} "
          f"mean_err={report.diameters.mean_error:.4f} max_err={report.diameters.max_error:.4f}")
    return 0


def _cmd_replay(args) -> int:
    scenario = load_scenario(args.scenario) if args.scenario else None
    n_scans, db = replay(args.scans, args.out, scenario)
    print(f"scans={n_scans} trees={len(db)}")
    return 0


def _cmd_metrics(args) -> int:
    scenario = load_scenario(args.world)
    db = TreeDatabase.from_json(Path(args.db).read_text(encoding="utf-8"),
                                scenario.db.thre_dist)
    report = diameter_metrics(db, scenario.world, scenario.db.min_votes,
                              gate=scenario.db.thre_dist)
    print(json.dumps(report.to_json_obj(), sort_keys=True, indent=2))
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forestnav",
                                     description="Forest sensing and navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario and write artifacts")
    p.add_argument("--scenario", required=True, help="scenario YAML path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--search", choices=["narrow", "deep"], default=None,
                   help="override search method")
    p.add_argument("--steps", type=int, default=None, help="override step limit")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("replay", help="run detection over a recorded scan log")
    p.add_argument("--scans", required=True, help="scan log path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scenario", default=None,
                   help="scenario YAML supplying filter/discrimination/db parameters")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("metrics", help="compare a database snapshot to ground truth")
    p.add_argument("--db", required=True, help="database JSON snapshot path")
    p.add_argument("--world", required=True, help="scenario YAML supplying ground truth")
    p.add_argument("--out", default=None, help="optional report CSV path")
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MissionAbort, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
