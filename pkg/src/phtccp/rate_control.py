"""Congestion detection, hop-by-hop rate adjustment and the piggyback header.

All rates are packets per second, service times are seconds.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

PROSE = "prose"
FIGURE = "figure"

FIXED_SCALE = 256
_U16_MAX = 0xFFFF
_U8_MAX = 0xFF
_WIRE = struct.Struct(">HBBH")


class UndefinedRatioError(ZeroDivisionError):
    """The service ratio needs a positive scheduling rate."""


def packet_service_ratio(r_s: float, r_sch: float) -> float:
    if r_sch <= 0:
        raise UndefinedRatioError("scheduling rate must be > 0 to form the service ratio")
    return r_s / r_sch


def update_service_time(avg_t_s: float, inst_t_s: float, w_s: float) -> float:
    """One EWMA step of the average per-packet service time."""
    if not 0.0 < w_s < 1.0:
        raise ValueError("w_s must lie in (0, 1)")
    if inst_t_s <= 0:
        raise ValueError("instantaneous service time must be > 0")
    return (1.0 - w_s) * avg_t_s + w_s * inst_t_s


def quantize(value: float, bits: int = 16) -> float:
    """Round to the 1/256 fixed-point grid of the header, saturating."""
    top = (1 << bits) - 1
    return min(top, max(0, round(value * FIXED_SCALE))) / FIXED_SCALE


@dataclass(frozen=True)
class PiggybackInfo:
    r_sch: float
    child_count: int
    active_child_count: int
    weight_denominator: float

    def __post_init__(self):
        if self.active_child_count > self.child_count:
            raise ValueError("active_child_count cannot exceed child_count")
        if min(self.r_sch, self.child_count, self.active_child_count, self.weight_denominator) < 0:
            raise ValueError("piggyback fields must be >= 0")
        if not (math.isfinite(self.r_sch) and math.isfinite(self.weight_denominator)):
            raise ValueError("piggyback fields must be finite")

    def encode(self) -> bytes:
        return _WIRE.pack(
            min(_U16_MAX, round(self.r_sch * FIXED_SCALE)),
            min(_U8_MAX, self.child_count),
            min(_U8_MAX, self.active_child_count),
            min(_U16_MAX, round(self.weight_denominator * FIXED_SCALE)),
        )

    @classmethod
    def decode(cls, raw: bytes) -> "PiggybackInfo":
        r, c, a, w = _WIRE.unpack(raw)
        return cls(r / FIXED_SCALE, c, a, w / FIXED_SCALE)

    @classmethod
    def quantized(cls, r_sch, child_count, active_child_count, weight_denominator) -> "PiggybackInfo":
        """The header exactly as the receiver will decode it."""
        return cls.decode(cls(r_sch, child_count, active_child_count, weight_denominator).encode())


WIRE_SIZE = _WIRE.size


@dataclass
class RateState:
    r_sch: float = 4.0
    t_s: float = 0.25
    r_or: tuple[float, ...] = ()
    r_sch_init: float = 4.0
    mu: float = 0.5
    beta: float = 0.75
    w_s: float = 0.1
    last_info: Optional[PiggybackInfo] = None
    stale_ignored: int = 0
    adjustments: int = 0

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.r_sch_init <= 0:
            raise ValueError("r_sch_init must be > 0")

    @classmethod
    def initial(cls, r_sch_init=4.0, mu=0.5, beta=0.75, w_s=0.1, r_or=()) -> "RateState":
        # starting point r(i) = 1: service rate equals the initial scheduling rate
        return cls(r_sch=r_sch_init, t_s=1.0 / r_sch_init, r_or=tuple(r_or),
                   r_sch_init=r_sch_init, mu=mu, beta=beta, w_s=w_s)

    @property
    def r_s(self) -> float:
        return 1.0 / self.t_s

    @property
    def ratio(self) -> float:
        return packet_service_ratio(self.r_s, self.r_sch)

    def record_service(self, inst_t_s: float) -> float:
        self.t_s = update_service_time(self.t_s, inst_t_s, self.w_s)
        return self.t_s


def scheduling_rate_rule(r_s: float, r_sch: float, mu: float, beta: float) -> float:
    ratio = packet_service_ratio(r_s, r_sch)
    if ratio < mu:
        return r_s
    if ratio > 1.0:
        return beta * r_s
    return r_sch


def calculate_scheduling_rate(state: RateState) -> float:
    state.r_sch = scheduling_rate_rule(state.r_s, state.r_sch, state.mu, state.beta)
    return state.r_sch


def calc_excess_link_capacity(child_rates: Sequence[float], active: Iterable[int], mode: str = PROSE) -> float:
    """Scheduling rate left unclaimed by idle children.

    ``active`` holds indices into ``child_rates``. In ``figure`` mode both
    sums are divided by the number of children.
    """
    active = set(active)
    if not active <= set(range(len(child_rates))):
        raise ValueError("active children must be a subset of the children")
    if not child_rates:
        return 0.0
    total = sum(child_rates)
    claimed = sum(child_rates[i] for i in active)
    if mode == PROSE:
        return total - claimed
    if mode == FIGURE:
        c = len(child_rates)
        return total / c - claimed / c
    raise ValueError(f"unknown excess-capacity mode {mode!r}")


def calc_node_weight_factor(own_avg_q: float, sibling_avg_q_sum: float, is_active: bool, active_count: int) -> float:
    if own_avg_q < 0 or sibling_avg_q_sum < 0:
        raise ValueError("queue lengths must be >= 0")
    if not is_active:
        return 0.0
    if sibling_avg_q_sum > 0:
        return own_avg_q / sibling_avg_q_sum
    # every active sibling is empty: split the excess evenly
    return 1.0 / active_count if active_count > 0 else 0.0


def dyn_rate_adj(parent_r_sch: float, active_count: int, child_count: int, excess: float, phi: float) -> float:
    if child_count <= 0:
        raise ValueError("a node with a parent implies child_count >= 1")
    if not 0 <= active_count <= child_count:
        raise ValueError("active_count must lie in [0, child_count]")
    base = parent_r_sch / child_count
    if active_count == child_count:
        return base
    return base + phi * excess


def calculate_source_rate(r_sch: float, alphas: Sequence[float], r_or_max: float = math.inf) -> tuple[float, ...]:
    total = sum(alphas)
    if total <= 0:
        raise ValueError("class priorities must sum to > 0")
    return tuple(min(r_or_max, max(0.0, r_sch * a / total)) for a in alphas)


def child_entitlement(info: PiggybackInfo, own_avg_q: float, is_active: bool, mode: str = PROSE) -> tuple[float, float]:
    """(new scheduling rate, weight factor) a child derives from its parent's header."""
    c, a = info.child_count, info.active_child_count
    share = info.r_sch / c
    excess = calc_excess_link_capacity([share] * c, range(a), mode)
    phi = calc_node_weight_factor(own_avg_q, info.weight_denominator, is_active, a)
    if not is_active:
        return share, 0.0
    return dyn_rate_adj(info.r_sch, a, c, excess, phi), phi


@dataclass
class OverhearOutcome:
    adjusted: bool
    stale: bool = False
    phi: float = 0.0


def on_overheard(
    state: RateState,
    info: PiggybackInfo,
    own_avg_q: float,
    alphas: Sequence[float],
    r_or_max: float = math.inf,
    *,
    is_active: bool = True,
    excess_mode: str = PROSE,
    info_age: float = 0.0,
    freshness_window: float = math.inf,
) -> OverhearOutcome:
    """React to the parent's header.

    Adjusts only when the header differs from the last one acted upon or the
    node's own service ratio has fallen below ``mu``.
    """
    if info_age > freshness_window:
        state.stale_ignored += 1
        return OverhearOutcome(False, stale=True)
    if info == state.last_info and state.ratio >= state.mu:
        return OverhearOutcome(False)
    calculate_scheduling_rate(state)
    state.r_sch, phi = child_entitlement(info, own_avg_q, is_active, excess_mode)
    state.r_or = calculate_source_rate(state.r_sch, alphas, r_or_max)
    state.last_info = info
    state.adjustments += 1
    return OverhearOutcome(True, phi=phi)
