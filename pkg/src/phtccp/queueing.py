"""Classifier, per-class priority queues and the weighted-fair scheduler."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

ROUTE = "route"
SOURCE = "source"


class ProtocolError(ValueError):
    """A frame violated the protocol (e.g. unknown traffic class)."""


@dataclass(frozen=True)
class TrafficClass:
    id: int
    priority: int
    name: str = ""


@dataclass
class Packet:
    cls: int
    origin: int
    prev_hop: int
    seq: int
    payload_len: int = 33
    created_at: float = 0.0
    hop_count: int = 0
    # header fields filled by the sender at transmission time
    piggyback: object = None
    sender_avg_q: float = 0.0


def classify(p: Packet, self_id: int, n_classes: int) -> tuple[int, str]:
    """Class id and intra-queue segment; locally originated packets go to the source segment."""
    if not 1 <= p.cls <= n_classes:
        raise ProtocolError(f"unknown traffic class {p.cls} (have {n_classes})")
    return p.cls, SOURCE if p.origin == self_id else ROUTE


@dataclass
class ClassQueue:
    tclass: TrafficClass
    capacity: int = 10
    route_segment: deque = field(default_factory=deque)
    source_segment: deque = field(default_factory=deque)
    enqueued: int = 0
    dequeued: int = 0
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.route_segment) + len(self.source_segment)

    def head(self) -> Optional[Packet]:
        if self.route_segment:
            return self.route_segment[0]
        if self.source_segment:
            return self.source_segment[0]
        return None

    def pop(self) -> Packet:
        seg = self.route_segment if self.route_segment else self.source_segment
        self.dequeued += 1
        return seg.popleft()


class SchedulerState:
    """N class queues served by self-clocked weighted fair queuing.

    Each backlogged queue carries a virtual start tag; the head packet's
    finish tag is ``start + length / weight``. The queue with the smallest
    finish tag is served (ties go to the lower class id) and the system
    virtual time jumps to the served tag.
    """

    def __init__(self, classes: list[TrafficClass], capacity: int = 10):
        if not classes:
            raise ValueError("need at least one traffic class")
        self.classes = list(classes)
        self.queues = [ClassQueue(c, capacity) for c in self.classes]
        self.virtual_time = 0.0
        self._start = [0.0] * len(self.queues)
        self._last_finish = [0.0] * len(self.queues)

    @property
    def n_classes(self) -> int:
        return len(self.queues)

    def lengths(self) -> list[int]:
        return [len(q) for q in self.queues]

    def total(self) -> int:
        return sum(len(q) for q in self.queues)

    def enqueue(self, p: Packet, segment: str) -> bool:
        j = p.cls - 1
        q = self.queues[j]
        if len(q) >= q.capacity:
            q.dropped += 1
            return False
        if len(q) == 0:
            self._start[j] = max(self._last_finish[j], self.virtual_time)
        (q.route_segment if segment == ROUTE else q.source_segment).append(p)
        q.enqueued += 1
        return True

    def _finish_tag(self, j: int) -> float:
        q = self.queues[j]
        return self._start[j] + q.head().payload_len / q.tclass.priority

    def schedule_next(self) -> Optional[Packet]:
        best, best_tag = None, None
        for j, q in enumerate(self.queues):
            if len(q) == 0:
                continue
            tag = self._finish_tag(j)
            if best is None or tag < best_tag:
                best, best_tag = j, tag
        if best is None:
            return None
        packet = self.queues[best].pop()
        self.virtual_time = best_tag
        self._last_finish[best] = best_tag
        self._start[best] = best_tag
        return packet


def weighted_avg_queue_length(queues, alphas) -> float:
    """sum(alpha_j * q_j) / N; ``queues`` is a SchedulerState or a list of lengths."""
    lengths = queues.lengths() if isinstance(queues, SchedulerState) else list(queues)
    if len(lengths) != len(alphas) or not lengths:
        raise ValueError("need one weight per queue")
    return sum(a * q for a, q in zip(alphas, lengths)) / len(lengths)
