"""Command-line front end: ``phtccp run|preset|memory-table|validate``."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import engine, experiments
from .metrics import memory_table
from .scenario import MODES, ScenarioError, load
from .topology import ConfigurationError, TopologyError

SEED_ENV = "PHTCCP_SEED"


def _env_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError([f"{SEED_ENV}: expected an integer, got {raw!r}"]) from None


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("need at least one seed")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phtccp", description="Sensor-network congestion control simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario file")
    r.add_argument("scenario", type=Path)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--mode", choices=MODES, default=None)
    r.add_argument("--out", type=Path, default=Path("out"))

    pr = sub.add_parser("preset", help="run a named experiment matrix")
    pr.add_argument("name", choices=experiments.PRESET_NAMES)
    pr.add_argument("--seeds", type=_seed_list, default=None)
    pr.add_argument("--out", type=Path, default=Path("out"))
    pr.add_argument("--scenario", type=Path, default=None, help="base scenario (defaults otherwise)")
    pr.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    m = sub.add_parser("memory-table", help="print or write the memory requirement table")
    m.add_argument("--out", type=Path, default=None)
    m.add_argument("--queue-len", type=int, default=10)

    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("scenario", type=Path)
    return p


def _cmd_run(args) -> int:
    scenario = load(args.scenario)
    changes = {}
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is not None:
        changes["seed"] = seed
    if args.mode is not None:
        changes["mode"] = args.mode
    if changes:
        scenario = scenario.replace(**changes)
    log = engine.run(scenario)
    log.write_csvs(args.out)
    (args.out / "scenario.json").write_text(scenario.to_json() + "\n")
    s = log.summary()
    print(f"{scenario.name}: mode={scenario.mode} seed={scenario.seed} delivered={s['delivered']} "
          f"drop_pct={s['drop_pct']:.3f} energy_efficiency={s['energy_efficiency']} -> {args.out}")
    return 0


def _cmd_preset(args) -> int:
    base = load(args.scenario) if args.scenario else None
    seeds = args.seeds
    if seeds is None:
        env = _env_seed()
        seeds = [env] if env is not None else list(experiments.DEFAULT_SEEDS)
    rows = experiments.run_preset(args.name, base, seeds, args.out, jobs=max(1, args.jobs))
    print(f"{args.name}: {len(rows)} rows -> {args.out / args.name}")
    return 0


def _cmd_memory(args) -> int:
    rows = memory_table(args.queue_len)
    if args.out is None:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        experiments.write_rows(args.out, rows)
    return 0


def _cmd_validate(args) -> int:
    scenario = load(args.scenario)
    print(f"{args.scenario}: ok ({scenario.name}, mode={scenario.mode}, {scenario.n_nodes} nodes)")
    return 0


COMMANDS = {"run": _cmd_run, "preset": _cmd_preset, "memory-table": _cmd_memory, "validate": _cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print("phtccp: invalid scenario:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"phtccp: {exc.filename}: no such file", file=sys.stderr)
        return 2
    except (ConfigurationError, TopologyError) as exc:
        print(f"phtccp: configuration error: {exc}", file=sys.stderr)
        return 3
    except RuntimeError as exc:
        print(f"phtccp: simulation error in {args.command}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
