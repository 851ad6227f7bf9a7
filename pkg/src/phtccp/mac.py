"""Prioritised CSMA/CA service model (AIFS/CW/PF per class, RTS/CTS/DATA/ACK).

The engine drives the event timing; this module holds the per-node MAC
state, the timing constants and the collision relation between exchanges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

US = 1e-6
_EPS = 1e-9


@dataclass(frozen=True)
class ChannelModel:
    bit_rate: float = 32000.0
    control_frame_len: int = 3
    slot_time_us: int = 1000
    sifs_us: int = 500

    def __post_init__(self):
        if self.bit_rate <= 0:
            raise ValueError("bit_rate must be > 0")

    @property
    def slot(self) -> float:
        return self.slot_time_us * US

    @property
    def sifs(self) -> float:
        return self.sifs_us * US

    @property
    def control_airtime(self) -> float:
        return frame_airtime(self.control_frame_len, self)

    def handshake_time(self) -> float:
        """RTS + SIFS + CTS: the window in which an exchange can still be destroyed."""
        return 2 * self.control_airtime + self.sifs

    def exchange_time(self, data_len: int) -> float:
        return 3 * self.control_airtime + frame_airtime(data_len, self) + 3 * self.sifs

    def exchange_bytes(self, data_len: int) -> int:
        return 3 * self.control_frame_len + data_len


@dataclass(frozen=True)
class MacClassParams:
    aifs_us: int
    cw_min: int
    cw_max: int = 255
    pf: float = 2.0

    def __post_init__(self):
        if self.cw_min < 0 or self.cw_max < self.cw_min:
            raise ValueError("need 0 <= cw_min <= cw_max")
        if self.pf < 1:
            raise ValueError("persistence factor must be >= 1")

    @property
    def aifs(self) -> float:
        return self.aifs_us * US


def frame_airtime(length: int, ch: ChannelModel) -> float:
    if length < 0:
        raise ValueError("frame length must be >= 0")
    return length * 8 / ch.bit_rate


def default_class_params(alphas: Sequence[float], ch: ChannelModel, cw_max: int = 255, pf: float = 2.0) -> list[MacClassParams]:
    """Highest priority gets AIFS of 2 slots and CW 7; each rank down adds a slot and doubles CW."""
    order = sorted(range(len(alphas)), key=lambda j: (-alphas[j], j))
    params: list[Optional[MacClassParams]] = [None] * len(alphas)
    for rank, j in enumerate(order):
        cw = min(cw_max, 2 ** (3 + rank) - 1)
        params[j] = MacClassParams((2 + rank) * ch.slot_time_us, cw, cw_max, pf)
    return params


def uncontended_service_time(params: MacClassParams, ch: ChannelModel, backoff_slots: int, data_len: int) -> float:
    """Service time of a single exchange on an idle channel."""
    return params.aifs + backoff_slots * ch.slot + ch.exchange_time(data_len)


def next_cw(cw: int, params: MacClassParams) -> int:
    return int(min(params.cw_max, math.floor(cw * params.pf)))


@dataclass
class ServiceMeasurement:
    arrival_at_mac: float
    departure: float

    @property
    def inst_service_time(self) -> float:
        return self.departure - self.arrival_at_mac


@dataclass
class Exchange:
    sender: int
    receiver: int
    start: float
    handshake_end: float
    end: float
    data_len: int
    failed: bool = False
    established: bool = False

    def nodes(self) -> tuple[int, int]:
        return self.sender, self.receiver


def conflicts(a: Exchange, b: Exchange, neighbor_sets: Sequence[set]) -> bool:
    """True when any endpoint of ``a`` is within range of (or is) an endpoint of ``b``."""
    for x in a.nodes():
        nx = neighbor_sets[x]
        for y in b.nodes():
            if x == y or y in nx:
                return True
    return False


@dataclass
class MacState:
    """Depth-1 MAC: at most one packet handed over by the scheduler."""

    packet: object = None
    arrival: float = 0.0
    cw: int = 0
    retries: int = 0
    slots: int = 0
    countdown_start: float = 0.0
    fire_time: float = math.inf
    token: int = 0
    transmitting: bool = False
    busy_until: float = 0.0
    measurements: list = field(default_factory=list)

    @property
    def contending(self) -> bool:
        return self.packet is not None and not self.transmitting and self.fire_time < math.inf

    def arm(self, now: float, aifs: float, slot: float) -> float:
        """Start or resume the countdown once the medium is free."""
        self.countdown_start = max(now, self.busy_until) + aifs
        self.fire_time = self.countdown_start + self.slots * slot
        self.token += 1
        return self.fire_time

    def freeze(self, now: float, slot: float) -> None:
        """Medium turned busy at ``now``: keep only the slots not yet counted down."""
        if now > self.countdown_start:
            consumed = int(math.floor((now - self.countdown_start) / slot + _EPS))
            self.slots = max(0, self.slots - consumed)
        self.fire_time = math.inf
        self.token += 1

    def disarm(self) -> None:
        self.fire_time = math.inf
        self.token += 1


def overlapping_conflicts(log: Sequence[tuple], neighbor_sets: Sequence[set]) -> list[tuple]:
    """Pairs of successful exchanges that overlap in time and interfere.

    ``log`` rows are ``(start, end, sender, receiver, ok)``; an empty result
    means the collision model never let two interfering exchanges both succeed.
    """
    done = sorted((r for r in log if r[4]), key=lambda r: r[0])
    bad, live = [], []
    for row in done:
        live = [z for z in live if z[1] > row[0] + _EPS]
        x = Exchange(row[2], row[3], row[0], row[0], row[1], 0)
        for z in live:
            if conflicts(x, Exchange(z[2], z[3], z[0], z[0], z[1], 0), neighbor_sets):
                bad.append((z, row))
        live.append(row)
    return bad
