"""Experiment presets: named scenario matrices plus their result tables."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import engine
from .metrics import MetricsLog, memory_table
from .scenario import Scenario, from_dict

PRESET_NAMES = (
    "fig5_drop_vs_ratio",
    "fig6_queue_vs_ratio",
    "fig7_queue_vs_time",
    "fig8_fig9_memory",
    "fig10_per_class",
    "fig11_throughput",
    "fig12_energy",
)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)
RATIO_TARGETS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
OFFERED_RATES = (4.0, 8.0, 12.0, 16.0)
COMPARED_MODES = ("none", "ccf_lite", "phtccp")


@dataclass
class RunSpec:
    run_id: str
    scenario: Scenario
    tags: dict


@dataclass
class RunResult:
    spec: RunSpec
    log: MetricsLog


def _fmt(x: float) -> str:
    return f"{x:g}"


def _ratio_runs(base: Scenario, seeds, rates) -> list[RunSpec]:
    out = []
    for rate in rates:
        for target in RATIO_TARGETS:
            for seed in seeds:
                sc = base.replace(seed=seed, mode="phtccp", pinned_ratio=target, r_or_init=rate)
                out.append(RunSpec(f"r{_fmt(rate)}_ratio{_fmt(target)}_s{seed}", sc,
                                   {"seed": seed, "offered_pps": rate, "target_ratio": target}))
    return out


def _mode_runs(base: Scenario, seeds, modes, **over) -> list[RunSpec]:
    return [RunSpec(f"{m}_s{s}", base.replace(seed=s, mode=m, **over), {"seed": s, "mode": m})
            for m in modes for s in seeds]


def _rows_fig5(results: list[RunResult]) -> list[dict]:
    return [{**r.spec.tags, "drop_pct": round(r.log.drop_percentage(), 6),
             "buffer_drops": r.log.total_buffer_drops, "enqueued": r.log.enqueued} for r in results]


def _rows_fig6(results: list[RunResult]) -> list[dict]:
    rows = []
    for r in results:
        p = r.log.probe_node
        rows.append({**r.spec.tags, "probe_node": p,
                     "probe_avg_q_mean": round(r.log.queue_stats[p].mean(r.log.duration), 6) if p is not None else ""})
    return rows


def _rows_series(keys: tuple[str, ...]) -> Callable[[list[RunResult]], list[dict]]:
    def rows(results: list[RunResult]) -> list[dict]:
        out = []
        for r in results:
            for sample in r.log.samples:
                out.append({**r.spec.tags, "t": sample["t"], **{k: sample.get(k, "") for k in keys}})
        return out
    return rows


def _rows_fig10(results: list[RunResult]) -> list[dict]:
    if not results:
        return []
    keys = tuple(f"delivered_c{j + 1}" for j in range(len(results[0].spec.scenario.alphas)))
    return _rows_series(keys)(results)


def _rows_fig11(results: list[RunResult]) -> list[dict]:
    rows = _rows_series(("norm_throughput",))(results)
    for r in results:
        rows.append({**r.spec.tags, "t": "idle_window_mean",
                     "norm_throughput": round(r.log.mean_normalized_throughput(*r.spec.scenario.idle_window), 9)})
    return rows


def _rows_fig12(results: list[RunResult]) -> list[dict]:
    rows = []
    for r in results:
        ee = r.log.energy_efficiency()
        rows.append({**r.spec.tags, "tx_bytes": r.log.tx_bytes, "rx_bytes": r.log.delivered_bytes,
                     "mean_hops": round(r.log.mean_hops, 6),
                     "energy_efficiency": "" if ee is None else round(ee, 6)})
    return rows


@dataclass
class ExperimentPreset:
    name: str
    description: str
    build: Callable[[Scenario, tuple], list[RunSpec]]
    rows: Callable[[list[RunResult]], list[dict]]


PRESETS: dict[str, ExperimentPreset] = {
    "fig5_drop_vs_ratio": ExperimentPreset(
        "fig5_drop_vs_ratio", "buffer-drop percentage versus pinned service ratio for offered loads 4-16 pps",
        lambda base, seeds: _ratio_runs(base, seeds, OFFERED_RATES), _rows_fig5),
    "fig6_queue_vs_ratio": ExperimentPreset(
        "fig6_queue_vs_ratio", "probe-node weighted average queue length versus pinned service ratio",
        lambda base, seeds: _ratio_runs(base, seeds, (base.r_or_init,)), _rows_fig6),
    "fig7_queue_vs_time": ExperimentPreset(
        "fig7_queue_vs_time", "probe-node weighted average queue length per second",
        lambda base, seeds: _mode_runs(base, seeds, ("phtccp",)), _rows_series(("probe_avg_q", "probe_r_sch", "probe_r_s"))),
    "fig8_fig9_memory": ExperimentPreset(
        "fig8_fig9_memory", "analytical memory requirement table",
        lambda base, seeds: [], lambda results: []),
    "fig10_per_class": ExperimentPreset(
        "fig10_per_class", "cumulative per-class sink deliveries per second",
        lambda base, seeds: _mode_runs(base, seeds, ("phtccp",)),
        _rows_fig10),
    "fig11_throughput": ExperimentPreset(
        "fig11_throughput", "normalized sink throughput per second with relays idle in the idle window",
        lambda base, seeds: _mode_runs(base, seeds, ("phtccp", "ccf_lite"),
                                       idle_fraction=base.idle_fraction or 0.3), _rows_fig11),
    "fig12_energy": ExperimentPreset(
        "fig12_energy", "energy efficiency T/(R*H) per mode",
        lambda base, seeds: _mode_runs(base, seeds, COMPARED_MODES), _rows_fig12),
}


def execute(spec: RunSpec) -> RunResult:
    return RunResult(spec, engine.run(spec.scenario))


def _execute_dict(args) -> tuple[str, dict, MetricsLog]:
    run_id, data = args
    return run_id, data, engine.run(from_dict(data))


def run_preset(name: str, base: Optional[Scenario] = None, seeds=DEFAULT_SEEDS,
               out_dir=None, jobs: int = 1) -> list[dict]:
    """Run every scenario of a preset; write per-run CSVs and ``results.csv`` under ``out_dir``."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    preset = PRESETS[name]
    base = base or Scenario()
    root = Path(out_dir) / name if out_dir is not None else None
    if name == "fig8_fig9_memory":
        rows = memory_table(base.queue_capacity)
        if root is not None:
            write_rows(root / "memory.csv", rows)
        return rows

    specs = preset.build(base, tuple(seeds))
    if jobs > 1:
        by_id = {s.run_id: s for s in specs}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = pool.map(_execute_dict, [(s.run_id, s.scenario.to_dict()) for s in specs])
            results = [RunResult(by_id[rid], log) for rid, _, log in done]
    else:
        results = [execute(s) for s in specs]

    rows = preset.rows(results)
    if root is not None:
        for r in results:
            run_dir = root / r.spec.run_id
            r.log.write_csvs(run_dir)
            (run_dir / "scenario.json").write_text(r.spec.scenario.to_json() + "\n")
        write_rows(root / "results.csv", rows)
    return rows


def write_rows(path, rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields: list[str] = []
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path


def describe() -> str:
    return json.dumps({k: p.description for k, p in PRESETS.items()}, indent=2)
