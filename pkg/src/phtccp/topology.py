"""Deployment generation, shortest-hop routing tree and node activity."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

SINK = 0
MAX_REPAIR_ROUNDS = 1000


class ConfigurationError(ValueError):
    """Raised when a scenario cannot be realised (bad parameters, disconnected field)."""


class TopologyError(ValueError):
    """Raised when a deployment cannot be turned into a routing tree."""

    def __init__(self, message, stranded=()):
        super().__init__(message)
        self.stranded = tuple(stranded)


@dataclass(frozen=True)
class Deployment:
    positions: tuple[tuple[float, float], ...]
    field_size: tuple[float, float]
    tx_range: float

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def distance(self, a: int, b: int) -> float:
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xa - xb, ya - yb)

    def in_range(self, a: int, b: int) -> bool:
        return self.distance(a, b) <= self.tx_range

    def neighbors(self) -> list[list[int]]:
        """Unit-disk adjacency lists; symmetric because the range is shared."""
        n = self.n_nodes
        adj: list[list[int]] = [[] for _ in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                if self.in_range(a, b):
                    adj[a].append(b)
                    adj[b].append(a)
        return adj

    def to_dict(self) -> dict:
        return {
            "positions": [list(p) for p in self.positions],
            "field_size": list(self.field_size),
            "tx_range": self.tx_range,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Deployment":
        return cls(
            positions=tuple((float(x), float(y)) for x, y in data["positions"]),
            field_size=(float(data["field_size"][0]), float(data["field_size"][1])),
            tx_range=float(data["tx_range"]),
        )


def _reachable(positions, tx_range) -> set[int]:
    seen = {SINK}
    frontier = [SINK]
    r2 = tx_range * tx_range
    while frontier:
        a = frontier.pop()
        xa, ya = positions[a]
        for b, (xb, yb) in enumerate(positions):
            if b not in seen and (xa - xb) ** 2 + (ya - yb) ** 2 <= r2:
                seen.add(b)
                frontier.append(b)
    return seen


def generate_deployment(
    n_nodes: int,
    field_size: tuple[float, float],
    tx_range: float,
    seed: int,
    sink_position: tuple[float, float] | None = None,
) -> Deployment:
    """Scatter ``n_nodes`` uniformly over the field with the sink as node 0.

    Nodes that cannot reach the sink are re-sampled until the unit-disk graph
    is connected; after ``MAX_REPAIR_ROUNDS`` rounds a ConfigurationError is
    raised. The sink sits at ``sink_position`` (field centre by default).
    """
    if n_nodes < 1:
        raise ConfigurationError("n_nodes must be >= 1")
    if tx_range <= 0:
        raise ConfigurationError("tx_range must be > 0")
    width, height = field_size
    if width <= 0 or height <= 0:
        raise ConfigurationError("field dimensions must be > 0")
    if sink_position is None:
        sink_position = (width / 2.0, height / 2.0)
    sx, sy = sink_position
    if not (0.0 <= sx <= width and 0.0 <= sy <= height):
        raise ConfigurationError("sink_position lies outside the field")

    rng = random.Random(f"deployment:{seed}")
    positions = [(float(sx), float(sy))]
    positions += [(rng.uniform(0, width), rng.uniform(0, height)) for _ in range(n_nodes - 1)]

    for _ in range(MAX_REPAIR_ROUNDS):
        stranded = [i for i in range(n_nodes) if i not in _reachable(positions, tx_range)]
        if not stranded:
            break
        for i in stranded:
            positions[i] = (rng.uniform(0, width), rng.uniform(0, height))
    else:
        stranded = [i for i in range(n_nodes) if i not in _reachable(positions, tx_range)]
        if stranded:
            raise ConfigurationError(
                f"could not connect {len(stranded)} node(s) to the sink after "
                f"{MAX_REPAIR_ROUNDS} repair rounds"
            )
    return Deployment(tuple(positions), (float(width), float(height)), float(tx_range))


@dataclass(frozen=True)
class RoutingTree:
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]
    depth: dict[int, int]

    @property
    def nodes(self) -> list[int]:
        return sorted(self.depth)

    def child_count(self, node: int) -> int:
        return len(self.children.get(node, ()))

    def path_to_sink(self, node: int) -> list[int]:
        path = [node]
        while path[-1] != SINK:
            path.append(self.parent[path[-1]])
            if len(path) > len(self.depth) + 1:
                raise TopologyError(f"cycle detected from node {node}")
        return path

    def subtree(self, node: int) -> list[int]:
        out, stack = [], [node]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(self.children.get(n, ()))
        return sorted(out)

    def to_dict(self) -> dict:
        # parents[i] is None for the sink
        return {"parents": [self.parent.get(i) for i in self.nodes]}

    @classmethod
    def from_parents(cls, parents: list[int | None]) -> "RoutingTree":
        parent = {i: p for i, p in enumerate(parents) if p is not None}
        if parents[SINK] is not None:
            raise TopologyError("the sink cannot have a parent")
        children: dict[int, list[int]] = {i: [] for i in range(len(parents))}
        for i, p in parent.items():
            if p not in children:
                raise TopologyError(f"node {i} names unknown parent {p}")
            children[p].append(i)
        depth = {SINK: 0}
        queue = deque([SINK])
        while queue:
            n = queue.popleft()
            for c in children[n]:
                depth[c] = depth[n] + 1
                queue.append(c)
        stranded = [i for i in range(len(parents)) if i not in depth]
        if stranded:
            raise TopologyError(f"nodes not connected to the sink: {stranded}", stranded)
        return cls(parent, {k: tuple(sorted(v)) for k, v in children.items()}, depth)


def build_tree(deployment: Deployment) -> RoutingTree:
    """Minimum-hop tree towards the sink.

    Among the neighbours one hop closer to the sink, a node picks the one
    nearest to the sink (Euclidean), then the smallest id.
    """
    adj = deployment.neighbors()
    hops = {SINK: 0}
    queue = deque([SINK])
    while queue:
        n = queue.popleft()
        for m in adj[n]:
            if m not in hops:
                hops[m] = hops[n] + 1
                queue.append(m)
    stranded = [i for i in range(deployment.n_nodes) if i not in hops]
    if stranded:
        raise TopologyError(f"deployment is disconnected; stranded nodes: {stranded}", stranded)

    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {i: [] for i in range(deployment.n_nodes)}
    for i in range(1, deployment.n_nodes):
        candidates = [m for m in adj[i] if hops[m] == hops[i] - 1]
        best = min(candidates, key=lambda m: (deployment.distance(m, SINK), m))
        parent[i] = best
        children[best].append(i)
    return RoutingTree(parent, {k: tuple(sorted(v)) for k, v in children.items()}, hops)


@dataclass
class ActivitySchedule:
    """Per-node idle (sleeping) intervals, half-open ``[start, end)``."""

    intervals: dict[int, list[tuple[float, float]]] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for node, spans in self.intervals.items():
            node = int(node)
            if node == SINK and spans:
                raise ConfigurationError("the sink is never idle")
            spans = sorted((float(s), float(e)) for s, e in spans)
            for s, e in spans:
                if e <= s:
                    raise ConfigurationError(f"empty idle interval ({s}, {e}) for node {node}")
            for (_, e1), (s2, _) in zip(spans, spans[1:]):
                if s2 < e1:
                    raise ConfigurationError(f"overlapping idle intervals for node {node}")
            if spans:
                cleaned[node] = spans
        self.intervals = cleaned

    def is_idle(self, node: int, t: float) -> bool:
        return any(s <= t < e for s, e in self.intervals.get(node, ()))

    def toggles(self) -> list[tuple[float, int, bool]]:
        """(time, node, awake_after) for every state change, time-ordered."""
        out = []
        for node, spans in self.intervals.items():
            for s, e in spans:
                out.append((s, node, False))
                out.append((e, node, True))
        return sorted(out)


def active_children(tree: RoutingTree, schedule: ActivitySchedule, node: int, t: float) -> list[int]:
    return [c for c in tree.children.get(node, ()) if not schedule.is_idle(c, t)]
