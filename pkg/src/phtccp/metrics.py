"""Run metrics, derived quantities and CSV export."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

MEMORY_PACKET_SIZES = (29, 33, 41, 64)
MEMORY_QUEUE_COUNTS = (1, 2, 3, 4, 5)
MOTE_MEMORY_BYTES = 4096


def drop_percentage(drops: int, accepted: int) -> float:
    total = drops + accepted
    return 0.0 if total == 0 else 100.0 * drops / total


def energy_efficiency(tx_bytes: float, rx_bytes: float, hops: float) -> Optional[float]:
    """T / (R * H); ``None`` when nothing was delivered."""
    if rx_bytes <= 0 or hops <= 0:
        return None
    return tx_bytes / (rx_bytes * hops)


def memory_requirement(n_queues: int, pkt_len: int, queue_len: int) -> int:
    if min(n_queues, pkt_len, queue_len) < 0:
        raise ValueError("memory model inputs must be >= 0")
    return n_queues * pkt_len * queue_len


def normalized_throughput_of(data_bytes: float, interval: float, bit_rate: float) -> float:
    return 0.0 if interval <= 0 else data_bytes * 8 / interval / bit_rate


def memory_table(queue_len: int = 10) -> list[dict]:
    rows = []
    for size in MEMORY_PACKET_SIZES:
        for n in MEMORY_QUEUE_COUNTS:
            need = memory_requirement(n, size, queue_len)
            rows.append({
                "packet_bytes": size,
                "queues": n,
                "queue_len": queue_len,
                "bytes": need,
                "pct_of_4kb": round(100.0 * need / MOTE_MEMORY_BYTES, 2),
            })
    return rows


def write_memory_csv(path, queue_len: int = 10) -> Path:
    path = Path(path)
    rows = memory_table(queue_len)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return path


@dataclass
class NodeQueueStats:
    """Time-weighted statistics of one node's weighted average queue length."""

    value: float = 0.0
    since: float = 0.0
    area: float = 0.0
    peak: float = 0.0

    def update(self, t: float, value: float) -> None:
        self.area += self.value * (t - self.since)
        self.since = t
        self.value = value
        self.peak = max(self.peak, value)

    def mean(self, t_end: float) -> float:
        if t_end <= 0:
            return 0.0
        return (self.area + self.value * (t_end - self.since)) / t_end


@dataclass
class MetricsLog:
    n_classes: int
    n_nodes: int
    bit_rate: float
    packet_size: int
    duration: float
    probe_node: Optional[int] = None

    generated: list = field(default_factory=list)
    delivered: list = field(default_factory=list)
    delivered_bytes: int = 0
    hop_sum: int = 0
    buffer_drops: list = field(default_factory=list)
    mac_drops: int = 0
    enqueued: int = 0
    tx_bytes: int = 0
    exchanges_ok: int = 0
    exchanges_failed: int = 0
    overhear_deliveries: int = 0
    class_grants: list = field(default_factory=list)
    node_buffer_drops: list = field(default_factory=list)
    node_drop_times: dict = field(default_factory=dict)
    queue_stats: list = field(default_factory=list)
    intra_queue_violations: int = 0
    residual: int = 0

    adjustment_instants: int = 0
    max_phi_error: float = 0.0
    max_conservation_error: float = 0.0

    samples: list = field(default_factory=list)
    node_samples: list = field(default_factory=list)
    exchange_log: list = field(default_factory=list)

    def __post_init__(self):
        self.generated = [0] * self.n_classes
        self.delivered = [0] * self.n_classes
        self.buffer_drops = [0] * self.n_classes
        self.class_grants = [0] * self.n_classes
        self.node_buffer_drops = [0] * self.n_nodes
        self.queue_stats = [NodeQueueStats() for _ in range(self.n_nodes)]

    # ---- totals -------------------------------------------------------
    @property
    def total_generated(self) -> int:
        return sum(self.generated)

    @property
    def total_delivered(self) -> int:
        return sum(self.delivered)

    @property
    def total_buffer_drops(self) -> int:
        return sum(self.buffer_drops)

    @property
    def mean_hops(self) -> float:
        return self.hop_sum / self.total_delivered if self.total_delivered else 0.0

    def energy_efficiency(self) -> Optional[float]:
        return energy_efficiency(self.tx_bytes, self.delivered_bytes, self.mean_hops)

    def conservation_gap(self) -> int:
        return self.total_generated - (self.total_delivered + self.total_buffer_drops + self.mac_drops + self.residual)

    # ---- windowed -----------------------------------------------------
    def _cum_at(self, key: str, t: float):
        if t <= 0:
            return 0
        for row in self.samples:
            if row["t"] >= t - 1e-9:
                return row[key]
        raise ValueError(f"no sample at t={t}")

    def drop_percentage(self, window: Optional[tuple[float, float]] = None) -> float:
        if window is None:
            return drop_percentage(self.total_buffer_drops, self.enqueued)
        t0, t1 = window
        drops = self._cum_at("buffer_drops", t1) - self._cum_at("buffer_drops", t0)
        acc = self._cum_at("enqueued", t1) - self._cum_at("enqueued", t0)
        return drop_percentage(drops, acc)

    def normalized_throughput(self, t: float) -> float:
        """Sink goodput over the second ending at ``t`` as a fraction of the channel bit rate."""
        got = self._cum_at("delivered_bytes", t) - self._cum_at("delivered_bytes", t - 1)
        return normalized_throughput_of(got, 1.0, self.bit_rate)

    def mean_normalized_throughput(self, t0: float, t1: float) -> float:
        got = self._cum_at("delivered_bytes", t1) - self._cum_at("delivered_bytes", t0)
        return normalized_throughput_of(got, t1 - t0, self.bit_rate)

    def drops_at(self, node: int, after: float = 0.0) -> int:
        return sum(1 for t in self.node_drop_times.get(node, ()) if t > after)

    # ---- export -------------------------------------------------------
    def summary(self) -> dict:
        ee = self.energy_efficiency()
        out = {
            "duration": self.duration,
            "generated": self.total_generated,
            "delivered": self.total_delivered,
            "buffer_drops": self.total_buffer_drops,
            "mac_drops": self.mac_drops,
            "residual": self.residual,
            "enqueued": self.enqueued,
            "drop_pct": round(self.drop_percentage(), 6),
            "tx_bytes": self.tx_bytes,
            "rx_bytes": self.delivered_bytes,
            "mean_hops": round(self.mean_hops, 6),
            "energy_efficiency": "" if ee is None else round(ee, 6),
            "exchanges_ok": self.exchanges_ok,
            "exchanges_failed": self.exchanges_failed,
            "overhear_deliveries": self.overhear_deliveries,
            "intra_queue_violations": self.intra_queue_violations,
            "adjustment_instants": self.adjustment_instants,
            "max_phi_error": self.max_phi_error,
            "max_conservation_error": self.max_conservation_error,
            "probe_node": "" if self.probe_node is None else self.probe_node,
        }
        for j in range(self.n_classes):
            out[f"delivered_c{j + 1}"] = self.delivered[j]
            out[f"generated_c{j + 1}"] = self.generated[j]
        if self.probe_node is not None:
            qs = self.queue_stats[self.probe_node]
            out["probe_avg_q_mean"] = round(qs.mean(self.duration), 6)
            out["probe_avg_q_peak"] = round(qs.peak, 6)
            out["probe_buffer_drops"] = self.node_buffer_drops[self.probe_node]
        return out

    def write_csvs(self, out_dir) -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {}
        paths["timeseries"] = _write_rows(out_dir / "timeseries.csv", self.samples)
        paths["summary"] = _write_rows(out_dir / "summary.csv", [self.summary()])
        if self.node_samples:
            paths["nodes"] = _write_rows(out_dir / "nodes.csv", self.node_samples)
        return paths


def _format(v):
    if isinstance(v, float):
        return repr(round(v, 9))
    return v


def _write_rows(path: Path, rows: list[dict]) -> Path:
    with path.open("w", newline="") as fh:
        if not rows:
            return path
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _format(v) for k, v in row.items()})
    return path
