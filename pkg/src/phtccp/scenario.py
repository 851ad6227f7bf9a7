"""Scenario configuration: defaults, JSON loading and the shared validator."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

MODES = ("phtccp", "ccf_lite", "none")
SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Invalid scenario; ``problems`` lists every offending field."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid scenario: " + "; ".join(self.problems))


@dataclass(frozen=True)
class Scenario:
    name: str = "default"
    seed: int = 1
    mode: str = "phtccp"
    duration: float = 60.0

    n_nodes: int = 100
    field_size: tuple[float, float] = (100.0, 100.0)
    tx_range: float = 30.0
    sink_position: Optional[tuple[float, float]] = None
    positions: Optional[tuple[tuple[float, float], ...]] = None
    parents: Optional[tuple[Optional[int], ...]] = None

    alphas: tuple[int, ...] = (3, 2, 1)
    class_names: tuple[str, ...] = ("temperature", "seismic", "acoustic")
    queue_capacity: int = 10
    packet_size: int = 33
    control_size: int = 3
    bit_rate: float = 32000.0

    mu: float = 0.5
    beta: float = 0.75
    w_s: float = 0.1
    r_sch_init: float = 4.0
    r_or_init: float = 4.0
    r_or_max: float = 16.0
    excess_mode: str = "prose"
    pinned_ratio: Optional[float] = None
    activity_timeout_factor: float = 2.0
    freshness_window: float = 1.0

    n_sources: int = 10
    sources: Optional[tuple[int, ...]] = None
    traffic: str = "periodic"

    idle_intervals: dict = field(default_factory=dict)
    idle_fraction: float = 0.0
    idle_window: tuple[float, float] = (30.0, 50.0)

    slot_us: int = 1000
    sifs_us: int = 500
    retry_limit: int = 5
    pf: float = 2.0
    cw_max: int = 255
    mac_classes: Optional[tuple[dict, ...]] = None

    def replace(self, **changes) -> "Scenario":
        merged = self.to_dict()
        merged.update({k: _plain(v) for k, v in changes.items()})
        return from_dict(merged)

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION}
        for f in dataclasses.fields(self):
            out[f.name] = _plain(getattr(self, f.name))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _plain(value):
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def load_schema() -> dict:
    text = resources.files("phtccp").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def _semantic_problems(s: Scenario) -> list[str]:
    problems = []
    if s.mode not in MODES:
        problems.append(f"mode: must be one of {MODES}")
    if s.class_names and len(s.class_names) != len(s.alphas):
        problems.append("class_names: need one name per entry of alphas")
    if s.positions is not None and len(s.positions) != s.n_nodes:
        problems.append("positions: length must equal n_nodes")
    if s.parents is not None:
        if len(s.parents) != s.n_nodes:
            problems.append("parents: length must equal n_nodes")
        elif s.parents[0] is not None:
            problems.append("parents: the sink (node 0) has no parent")
        if s.positions is None:
            problems.append("parents: requires explicit positions")
    if s.sources is not None:
        bad = [i for i in s.sources if not 1 <= i < s.n_nodes]
        if bad:
            problems.append(f"sources: ids out of range {bad}")
        if len(set(s.sources)) != len(s.sources):
            problems.append("sources: duplicate ids")
    elif s.n_sources > s.n_nodes - 1:
        problems.append("n_sources: more sources than non-sink nodes")
    for key, spans in s.idle_intervals.items():
        node = int(key)
        if node == 0:
            problems.append("idle_intervals: the sink is never idle")
        elif node >= s.n_nodes:
            problems.append(f"idle_intervals: unknown node {node}")
        for span in spans:
            if span[1] <= span[0]:
                problems.append(f"idle_intervals: empty interval {list(span)} for node {node}")
    lo, hi = s.idle_window
    if hi < lo:
        problems.append("idle_window: end before start")
    if s.mac_classes is not None and len(s.mac_classes) != len(s.alphas):
        problems.append("mac_classes: need one entry per traffic class")
    if s.mac_classes is not None:
        for i, c in enumerate(s.mac_classes):
            if c["cw_min"] > s.cw_max:
                problems.append(f"mac_classes[{i}].cw_min: exceeds cw_max")
    return problems


def from_dict(data: dict) -> Scenario:
    """Validate a scenario mapping (schema + semantic checks) and build it."""
    validator = jsonschema.Draft202012Validator(load_schema())
    problems = [
        f"{'.'.join(str(p) for p in err.absolute_path) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    ]
    if problems:
        raise ScenarioError(problems)
    kwargs = {k: _tuplify(v) for k, v in data.items() if k != "schema_version"}
    if "idle_intervals" in kwargs:
        kwargs["idle_intervals"] = {str(k): [tuple(x) for x in v] for k, v in data["idle_intervals"].items()}
    if "mac_classes" in kwargs and kwargs["mac_classes"] is not None:
        kwargs["mac_classes"] = tuple(dict(c) for c in data["mac_classes"])
    scenario = Scenario(**kwargs)
    problems = _semantic_problems(scenario)
    if problems:
        raise ScenarioError(problems)
    return scenario


def load(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: not valid JSON ({exc})"]) from exc
    if not isinstance(data, dict):
        raise ScenarioError([f"{path}: top level must be an object"])
    return from_dict(data)


def default() -> Scenario:
    return Scenario()
