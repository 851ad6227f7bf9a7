"""Deterministic discrete-event simulation of the sensor network.

A single heap of ``(time, kind, node, seq)`` events drives traffic
generation, the paced scheduler, the CSMA/CA contention model, header
overhearing and node sleep/wake toggles. ``run(scenario)`` returns the
MetricsLog of the run.
"""

from __future__ import annotations

import heapq
import math
import random
from enum import IntEnum
from typing import Optional

from . import rate_control as rc
from .mac import (ChannelModel, Exchange, MacClassParams, MacState, ServiceMeasurement, conflicts,
                  default_class_params, next_cw)
from .metrics import MetricsLog
from .queueing import Packet, ProtocolError, SchedulerState, TrafficClass, classify, weighted_avg_queue_length
from .scenario import MODES, Scenario, ScenarioError
from .topology import SINK, ActivitySchedule, ConfigurationError, Deployment, RoutingTree, build_tree, generate_deployment

_EPS = 1e-9
MIN_RATE = 1.0 / rc.FIXED_SCALE


class EventKind(IntEnum):
    GENERATE_PACKET = 0
    SCHEDULER_RELEASE = 1
    MAC_GRANT = 2
    HANDSHAKE_END = 3
    TX_COMPLETE = 4
    OVERHEAR_DELIVERY = 5
    ACTIVITY_TOGGLE = 6
    METRICS_SAMPLE = 7


def counted_active(last_heard: Optional[float], gap: Optional[float], r_sch: float, now: float, factor: float) -> bool:
    """Timeout rule a parent applies to a child (and the child to itself).

    A child is active while it was heard within ``factor`` times its packet
    interval, taken as the larger of the last observed gap and the interval
    implied by its advertised scheduling rate. Never-heard children are idle.
    """
    if last_heard is None:
        return False
    interval = 1.0 / max(r_sch, MIN_RATE)
    if gap is not None:
        interval = max(interval, gap)
    return now - last_heard <= factor * interval + _EPS


class ChildRecord:
    __slots__ = ("last_heard", "gap", "r_sch", "avg_q_units")

    def __init__(self):
        self.last_heard = None
        self.gap = None
        self.r_sch = 0.0
        self.avg_q_units = 0

    def heard(self, t: float, r_sch: float, avg_q_units: int) -> None:
        if self.last_heard is not None:
            self.gap = t - self.last_heard
        self.last_heard = t
        self.r_sch = r_sch
        self.avg_q_units = avg_q_units


class Node:
    def __init__(self, node_id: int, parent: Optional[int], children: tuple, depth: int,
                 classes: list[TrafficClass], capacity: int, rate: rc.RateState):
        self.id = node_id
        self.parent = parent
        self.children = children
        self.depth = depth
        self.awake = True
        self.is_source = False
        self.sched = SchedulerState(classes, capacity)
        self.rate = rate
        self.mac = MacState()
        self.pace_anchor = -math.inf
        self.release_token = 0
        n = len(classes)
        self.gen_rate = [0.0] * n
        self.gen_next = [math.inf] * n
        self.gen_token = [0] * n
        self.seq = 0
        self.child_records = {c: ChildRecord() for c in children}
        # this node as seen by its parent, tracked from its own ACKs
        self.self_record = ChildRecord()
        self.avg_q = 0.0
        # parent's allocation, used only by the pinned-ratio sweep
        self.allowed = math.inf


class Simulation:
    def __init__(self, scenario: Scenario, deployment: Optional[Deployment] = None,
                 tree: Optional[RoutingTree] = None, record_exchanges: bool = False,
                 check_invariants: bool = True):
        if scenario.mode not in MODES:
            raise ScenarioError([f"mode: unknown protocol mode {scenario.mode!r}"])
        self.sc = scenario
        self.alphas = list(scenario.alphas)
        self.n_classes = len(self.alphas)
        self.record_exchanges = record_exchanges
        self.check_invariants = check_invariants
        self.pinned = scenario.pinned_ratio
        self.mode = scenario.mode

        if deployment is None:
            if scenario.positions is not None:
                deployment = Deployment(tuple(tuple(map(float, p)) for p in scenario.positions),
                                        tuple(scenario.field_size), float(scenario.tx_range))
            else:
                deployment = generate_deployment(scenario.n_nodes, tuple(scenario.field_size), scenario.tx_range,
                                                 scenario.seed, scenario.sink_position)
        if tree is None:
            tree = RoutingTree.from_parents(list(scenario.parents)) if scenario.parents is not None else build_tree(deployment)
        self.deployment, self.tree = deployment, tree
        n = deployment.n_nodes
        self.n_nodes = n
        self.nbrs = [set(x) for x in deployment.neighbors()]
        for child, par in tree.parent.items():
            if par not in self.nbrs[child]:
                raise ConfigurationError(f"node {child} is out of range of its parent {par}")

        self.ch = ChannelModel(scenario.bit_rate, scenario.control_size, scenario.slot_us, scenario.sifs_us)
        if scenario.mac_classes is None:
            self.mac_params = default_class_params(self.alphas, self.ch, scenario.cw_max, scenario.pf)
        else:
            self.mac_params = [MacClassParams(c["aifs_us"], c["cw_min"], scenario.cw_max, scenario.pf)
                               for c in scenario.mac_classes]
        self.handshake = self.ch.handshake_time()
        self.exchange = self.ch.exchange_time(scenario.packet_size)
        self.slot = self.ch.slot

        classes = [TrafficClass(j + 1, a, scenario.class_names[j] if j < len(scenario.class_names) else "")
                   for j, a in enumerate(self.alphas)]
        self.nodes: list[Node] = []
        for i in range(n):
            r0 = rc.RateState.initial(scenario.r_sch_init, scenario.mu, scenario.beta, scenario.w_s)
            self.nodes.append(Node(i, tree.parent.get(i), tree.children.get(i, ()), tree.depth[i],
                                   classes, scenario.queue_capacity, r0))

        self.sources = self._pick_sources()
        for s in self.sources:
            self.nodes[s].is_source = True
        self.schedule = self._build_activity()
        self.probe = self._pick_probe()

        self.rng_mac = random.Random(f"mac:{scenario.seed}")
        self.rng_traffic = random.Random(f"traffic:{scenario.seed}")
        self.log = MetricsLog(self.n_classes, n, scenario.bit_rate, scenario.packet_size,
                              scenario.duration, self.probe)
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self.active: list[Exchange] = []
        self.stop_at = scenario.duration

    # ---- setup ---------------------------------------------------------
    def _pick_sources(self) -> list[int]:
        if self.sc.sources is not None:
            return sorted(self.sc.sources)
        others = [i for i in range(1, self.n_nodes)]
        others.sort(key=lambda i: (-self.tree.depth[i], i))
        return sorted(others[: self.sc.n_sources])

    def on_source_path(self) -> set[int]:
        path = set()
        for s in self.sources:
            path.update(self.tree.path_to_sink(s))
        path.discard(SINK)
        return path

    def _build_activity(self) -> ActivitySchedule:
        spans = {int(k): [tuple(x) for x in v] for k, v in self.sc.idle_intervals.items()}
        if self.sc.idle_fraction > 0:
            relays = sorted(self.on_source_path() - set(self.sources))
            k = int(round(self.sc.idle_fraction * len(relays)))
            picked = random.Random(f"idle:{self.sc.seed}").sample(relays, k) if k else []
            for node in picked:
                spans.setdefault(node, []).append(tuple(self.sc.idle_window))
        return ActivitySchedule(spans)

    def _pick_probe(self) -> Optional[int]:
        top = [c for c in self.tree.children.get(SINK, ())]
        if not top:
            return None
        src = set(self.sources)

        def load(c):
            return sum(1 for x in self.tree.subtree(c) if x in src)

        return min(top, key=lambda c: (-load(c), self.deployment.distance(c, SINK), c))

    # ---- event plumbing -------------------------------------------------
    def push(self, t: float, kind: EventKind, node: int, payload=None) -> None:
        if t < self.now - _EPS:
            raise RuntimeError(f"causality violation: event at {t} scheduled from {self.now}")
        self._seq += 1
        heapq.heappush(self._heap, (t, int(kind), node, self._seq, payload))

    def run(self) -> MetricsLog:
        sc = self.sc
        for s in self.sources:
            node = self.nodes[s]
            rates = rc.calculate_source_rate(sc.r_or_init, self.alphas, sc.r_or_max)
            node.rate.r_or = rates
            for j, r in enumerate(rates):
                self._set_gen_rate(node, j, r)
        for t, node, awake in self.schedule.toggles():
            self.push(t, EventKind.ACTIVITY_TOGGLE, node, awake)
        for k in range(1, math.ceil(sc.duration - _EPS) + 1):
            self.push(float(k), EventKind.METRICS_SAMPLE, 0, None)

        handlers = {
            EventKind.GENERATE_PACKET: self._on_generate,
            EventKind.SCHEDULER_RELEASE: self._on_release,
            EventKind.MAC_GRANT: self._on_grant,
            EventKind.HANDSHAKE_END: self._on_handshake_end,
            EventKind.TX_COMPLETE: self._on_tx_complete,
            EventKind.OVERHEAR_DELIVERY: self._on_overhear,
            EventKind.ACTIVITY_TOGGLE: self._on_toggle,
            EventKind.METRICS_SAMPLE: self._on_sample,
        }
        horizon = math.ceil(sc.duration - _EPS)
        while self._heap:
            t, kind, node, _, payload = heapq.heappop(self._heap)
            if t > horizon + _EPS:
                break
            self.now = t
            if kind != EventKind.METRICS_SAMPLE and t > sc.duration + _EPS:
                continue
            handlers[kind](node, payload)
        self._finish()
        return self.log

    def _finish(self) -> None:
        residual = 0
        for node in self.nodes:
            residual += node.sched.total()
            if node.mac.packet is not None:
                residual += 1
        self.log.residual = residual
        for i, node in enumerate(self.nodes):
            self.log.queue_stats[i].update(self.sc.duration, node.avg_q)

    # ---- traffic ---------------------------------------------------------
    def _set_gen_rate(self, node: Node, j: int, rate: float) -> None:
        """Change one class's originating rate, keeping the phase of the pending arrival."""
        old = node.gen_rate[j]
        node.gen_rate[j] = rate
        if abs(old - rate) < 1e-12 and node.gen_next[j] < math.inf:
            return
        if not node.awake or rate <= 0:
            node.gen_next[j] = math.inf
            node.gen_token[j] += 1
            return
        if self.sc.traffic == "poisson":
            nxt = self.now + self.rng_traffic.expovariate(rate)
        elif old > 0 and node.gen_next[j] < math.inf:
            remaining = max(0.0, node.gen_next[j] - self.now) * old
            nxt = self.now + remaining / rate
        else:
            nxt = self.now + 1.0 / rate
        node.gen_next[j] = nxt
        node.gen_token[j] += 1
        self.push(nxt, EventKind.GENERATE_PACKET, node.id, (j, node.gen_token[j]))

    def _apply_source_rates(self, node: Node) -> None:
        if not node.is_source:
            return
        for j, r in enumerate(node.rate.r_or):
            self._set_gen_rate(node, j, r)

    def _on_generate(self, nid: int, payload) -> None:
        j, token = payload
        node = self.nodes[nid]
        if token != node.gen_token[j] or not node.awake:
            return
        node.seq += 1
        pkt = Packet(j + 1, nid, nid, node.seq, self.sc.packet_size, self.now)
        self.log.generated[j] += 1
        self._enqueue(node, pkt)
        rate = node.gen_rate[j]
        if self.sc.traffic == "poisson":
            nxt = self.now + self.rng_traffic.expovariate(rate)
        else:
            nxt = self.now + 1.0 / rate
        node.gen_next[j] = nxt
        node.gen_token[j] += 1
        self.push(nxt, EventKind.GENERATE_PACKET, nid, (j, node.gen_token[j]))

    def inject(self, nid: int, cls: int, t: float = 0.0) -> None:
        """Queue one locally originated packet at ``t`` (used by tests and micro-experiments)."""
        node = self.nodes[nid]
        node.seq += 1
        pkt = Packet(cls, nid, nid, node.seq, self.sc.packet_size, t)
        self.log.generated[cls - 1] += 1
        self.now = t
        self._enqueue(node, pkt)

    # ---- queues and scheduler ---------------------------------------------
    def _enqueue(self, node: Node, pkt: Packet) -> None:
        try:
            cls, segment = classify(pkt, node.id, self.n_classes)
        except ProtocolError:
            self.log.buffer_drops[0] += 1
            raise
        if node.sched.enqueue(pkt, segment):
            self.log.enqueued += 1
        else:
            self.log.buffer_drops[cls - 1] += 1
            self.log.node_buffer_drops[node.id] += 1
            self.log.node_drop_times.setdefault(node.id, []).append(self.now)
        self._queue_changed(node)
        self._try_release(node)

    def _queue_changed(self, node: Node) -> None:
        node.avg_q = weighted_avg_queue_length(node.sched, self.alphas)
        self.log.queue_stats[node.id].update(self.now, node.avg_q)

    def _paced(self, node: Node) -> bool:
        return self.mode != "none"

    def _try_release(self, node: Node) -> None:
        if node.id == SINK or not node.awake or node.mac.packet is not None or node.sched.total() == 0:
            return
        if self._paced(node):
            interval = 1.0 / max(node.rate.r_sch, MIN_RATE)
            eligible = node.pace_anchor + interval
            if self.now + _EPS < eligible:
                node.release_token += 1
                self.push(eligible, EventKind.SCHEDULER_RELEASE, node.id, node.release_token)
                return
            node.pace_anchor = max(eligible, self.now - interval)
        self._release(node)

    def _on_release(self, nid: int, token) -> None:
        node = self.nodes[nid]
        if token == node.release_token:
            self._try_release(node)

    def _release(self, node: Node) -> None:
        sched = node.sched
        pkt = sched.schedule_next()
        if self.check_invariants:
            q = sched.queues[pkt.cls - 1]
            if pkt.origin == node.id and q.route_segment:
                self.log.intra_queue_violations += 1
        self._queue_changed(node)
        mac = node.mac
        mac.packet = pkt
        mac.arrival = self.now
        params = self.mac_params[pkt.cls - 1]
        mac.cw = params.cw_min
        mac.retries = 0
        mac.slots = self.rng_mac.randint(0, mac.cw)
        self._arm(node)

    # ---- MAC -------------------------------------------------------------
    def _arm(self, node: Node) -> None:
        mac = node.mac
        params = self.mac_params[mac.packet.cls - 1]
        t = mac.arm(self.now, params.aifs, self.slot)
        self.push(t, EventKind.MAC_GRANT, node.id, mac.token)

    def _mark_busy(self, nodes, until: float, cca_window: float) -> None:
        for b in nodes:
            other = self.nodes[b]
            mac = other.mac
            if until > mac.busy_until:
                mac.busy_until = until
            if mac.contending and other.awake:
                if mac.fire_time < self.now + cca_window - _EPS:
                    continue  # finishes its backoff in the same slot; cannot sense the carrier yet
                mac.freeze(self.now, self.slot)
                self._arm(other)

    def _on_grant(self, nid: int, token) -> None:
        node = self.nodes[nid]
        mac = node.mac
        if token != mac.token or mac.packet is None:
            return
        if not node.awake:
            mac.freeze(self.now, self.slot)
            return
        mac.fire_time = math.inf
        mac.transmitting = True
        t = self.now
        r = node.parent
        x = Exchange(nid, r, t, t + self.handshake, t + self.exchange, self.sc.packet_size)
        receiver = self.nodes[r]
        failed = (not receiver.awake or receiver.mac.transmitting or receiver.mac.busy_until > t + _EPS)
        for z in self.active:
            if conflicts(x, z, self.nbrs):
                failed = True
                if not z.established and (nid == z.receiver or z.receiver in self.nbrs[nid]
                                          or z.sender in self.nbrs[nid]):
                    z.failed = True
        x.failed = failed
        self.active.append(x)
        self.log.tx_bytes += self.ch.control_frame_len
        self._mark_busy(self.nbrs[nid], x.handshake_end, self.slot)
        self.push(x.handshake_end, EventKind.HANDSHAKE_END, nid, x)

    def _on_handshake_end(self, nid: int, x: Exchange) -> None:
        node = self.nodes[nid]
        mac = node.mac
        if x.failed:
            self.active.remove(x)
            mac.transmitting = False
            self.log.exchanges_failed += 1
            if self.record_exchanges:
                self.log.exchange_log.append((x.start, x.handshake_end, x.sender, x.receiver, False))
            mac.retries += 1
            if mac.retries > self.sc.retry_limit:
                self.log.mac_drops += 1
                mac.packet = None
                self._try_release(node)
                return
            params = self.mac_params[mac.packet.cls - 1]
            mac.cw = next_cw(mac.cw, params)
            mac.slots = self.rng_mac.randint(0, mac.cw)
            if node.awake:
                self._arm(node)
            return
        x.established = True
        self.log.tx_bytes += self.ch.control_frame_len
        around = (self.nbrs[x.sender] | self.nbrs[x.receiver]) - {x.sender}
        self._mark_busy(around, x.end, 0.0)
        self.push(x.end, EventKind.TX_COMPLETE, nid, x)

    def _on_tx_complete(self, nid: int, x: Exchange) -> None:
        node = self.nodes[nid]
        mac = node.mac
        self.active.remove(x)
        mac.transmitting = False
        self.log.tx_bytes += x.data_len + self.ch.control_frame_len
        self.log.exchanges_ok += 1
        if self.record_exchanges:
            self.log.exchange_log.append((x.start, x.end, x.sender, x.receiver, True))
            mac.measurements.append(ServiceMeasurement(mac.arrival, self.now))
        pkt = mac.packet
        mac.packet = None
        self.log.class_grants[pkt.cls - 1] += 1
        t = self.now

        header = self._header(node, t)
        avg_units = round(node.avg_q * rc.FIXED_SCALE)
        pkt.piggyback = header
        pkt.sender_avg_q = avg_units / rc.FIXED_SCALE
        pkt.hop_count += 1
        pkt.prev_hop = nid

        node.self_record.heard(t, header.r_sch, avg_units)
        parent = self.nodes[x.receiver]
        if x.receiver == SINK:
            self.log.delivered[pkt.cls - 1] += 1
            self.log.delivered_bytes += pkt.payload_len
            self.log.hop_sum += pkt.hop_count
        else:
            parent.child_records[nid].heard(t, header.r_sch, avg_units)
            self._enqueue(parent, pkt)

        self._service_update(node, t - mac.arrival)
        self._try_release(node)

        if self.mode == "phtccp" and self.pinned is None and self.check_invariants and node.children:
            self._check_allocation(node, header, t)
        for b in sorted(self.nbrs[nid]):
            other = self.nodes[b]
            if b == SINK or not other.awake:
                continue
            self.log.overhear_deliveries += 1
            if other.parent == nid:
                self.push(t, EventKind.OVERHEAR_DELIVERY, b, header)

    def _advertised_rate(self, node: Node) -> float:
        if self.mode == "ccf_lite":
            return node.rate.r_s
        return node.rate.r_sch

    def _header(self, node: Node, t: float) -> rc.PiggybackInfo:
        factor = self.sc.activity_timeout_factor
        active_units = [rec.avg_q_units for rec in node.child_records.values()
                        if counted_active(rec.last_heard, rec.gap, rec.r_sch, t, factor)]
        return rc.PiggybackInfo.quantized(
            min(self._advertised_rate(node), 255.0),
            len(node.children),
            len(active_units),
            sum(active_units) / rc.FIXED_SCALE,
        )

    def _check_allocation(self, node: Node, header: rc.PiggybackInfo, t: float) -> None:
        """Weight normalisation and rate conservation over the children the parent counts active."""
        factor = self.sc.activity_timeout_factor
        active = [c for c, rec in node.child_records.items()
                  if counted_active(rec.last_heard, rec.gap, rec.r_sch, t, factor)]
        if not active:
            return
        phis, rates = [], []
        for c in active:
            own = node.child_records[c].avg_q_units / rc.FIXED_SCALE
            rate, phi = rc.child_entitlement(header, own, True, self.sc.excess_mode)
            phis.append(phi)
            rates.append(rate)
        log = self.log
        log.adjustment_instants += 1
        log.max_phi_error = max(log.max_phi_error, abs(sum(phis) - 1.0))
        if self.sc.excess_mode == rc.PROSE:
            err = abs(sum(rates) - header.r_sch) / max(header.r_sch, 1e-12)
            log.max_conservation_error = max(log.max_conservation_error, err)

    # ---- rate control ------------------------------------------------------
    def _service_update(self, node: Node, inst: float) -> None:
        rate = node.rate
        rate.record_service(inst)
        if self.mode == "none":
            return
        if self.pinned is not None:
            rate.r_sch = rate.r_s / self.pinned
            if node.is_source:
                self._pinned_source_rates(node)
            return
        if self.mode == "phtccp":
            if node.parent == SINK or rate.ratio < rate.mu:
                rc.calculate_scheduling_rate(rate)
            else:
                return
        elif self.mode == "ccf_lite":
            if node.parent != SINK:
                return
            rate.r_sch = rate.r_s
        if node.is_source:
            rate.r_or = rc.calculate_source_rate(rate.r_sch, self.alphas, self.sc.r_or_max)
            self._apply_source_rates(node)

    def _pinned_source_rates(self, node: Node) -> None:
        """Pinned-ratio sweep: offered load capped by the pinned rate and the parent's allocation."""
        own = rc.calculate_source_rate(min(node.rate.r_sch, node.allowed), self.alphas, self.sc.r_or_max)
        offered = rc.calculate_source_rate(self.sc.r_or_init, self.alphas, self.sc.r_or_max)
        node.rate.r_or = tuple(min(a, b) for a, b in zip(own, offered))
        self._apply_source_rates(node)

    def _on_overhear(self, nid: int, header: rc.PiggybackInfo) -> None:
        node = self.nodes[nid]
        if not node.awake or self.mode == "none":
            return
        rate = node.rate
        if self.pinned is not None:
            if node.is_source:
                me = node.self_record
                active = counted_active(me.last_heard, me.gap, me.r_sch, self.now, self.sc.activity_timeout_factor)
                node.allowed, _ = rc.child_entitlement(header, me.avg_q_units / rc.FIXED_SCALE, active,
                                                       self.sc.excess_mode)
                self._pinned_source_rates(node)
            return
        if self.mode == "ccf_lite":
            rate.r_sch = max(header.r_sch / max(header.child_count, 1), MIN_RATE)
            rate.r_or = rc.calculate_source_rate(rate.r_sch, self.alphas, self.sc.r_or_max)
        else:
            me = node.self_record
            active = counted_active(me.last_heard, me.gap, me.r_sch, self.now, self.sc.activity_timeout_factor)
            out = rc.on_overheard(rate, header, me.avg_q_units / rc.FIXED_SCALE, self.alphas, self.sc.r_or_max,
                                  is_active=active, excess_mode=self.sc.excess_mode,
                                  freshness_window=self.sc.freshness_window)
            if not out.adjusted:
                return
            rate.r_sch = max(rate.r_sch, MIN_RATE)
        self._apply_source_rates(node)
        self._try_release(node)

    # ---- activity and sampling ---------------------------------------------
    def _on_toggle(self, nid: int, awake: bool) -> None:
        node = self.nodes[nid]
        if node.awake == awake:
            return
        node.awake = awake
        mac = node.mac
        if not awake:
            if mac.contending:
                mac.freeze(self.now, self.slot)
            for j in range(self.n_classes):
                node.gen_next[j] = math.inf
                node.gen_token[j] += 1
            node.release_token += 1
            return
        if mac.packet is not None and not mac.transmitting:
            self._arm(node)
        if node.is_source:
            for j, r in enumerate(node.gen_rate):
                node.gen_rate[j] = 0.0
                self._set_gen_rate(node, j, r)
        self._try_release(node)

    def _on_sample(self, _nid: int, _payload) -> None:
        log = self.log
        row = {"t": round(self.now, 6)}
        for j in range(self.n_classes):
            row[f"delivered_c{j + 1}"] = log.delivered[j]
        row["delivered_bytes"] = log.delivered_bytes
        row["generated"] = log.total_generated
        row["enqueued"] = log.enqueued
        row["buffer_drops"] = log.total_buffer_drops
        row["mac_drops"] = log.mac_drops
        row["tx_bytes"] = log.tx_bytes
        prev = log.samples[-1]["delivered_bytes"] if log.samples else 0
        row["norm_throughput"] = round((log.delivered_bytes - prev) * 8 / self.sc.bit_rate, 9)
        if self.probe is not None:
            p = self.nodes[self.probe]
            row["probe_avg_q"] = p.avg_q
            row["probe_r_sch"] = p.rate.r_sch
            row["probe_r_s"] = p.rate.r_s
            row["probe_ratio"] = p.rate.r_s / p.rate.r_sch if p.rate.r_sch > 0 else 0.0
        log.samples.append(row)
        for node in self.nodes[1:]:
            log.node_samples.append({
                "t": row["t"], "node": node.id, "avg_q": node.avg_q,
                "r_sch": node.rate.r_sch, "r_s": node.rate.r_s,
                "ratio": node.rate.r_s / node.rate.r_sch if node.rate.r_sch > 0 else 0.0,
            })


def run(scenario: Scenario, **kwargs) -> MetricsLog:
    return Simulation(scenario, **kwargs).run()
