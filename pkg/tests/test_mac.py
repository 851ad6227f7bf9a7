import random

import pytest
from hypothesis import given, strategies as st

from conftest import simulate
from phtccp import Scenario
from phtccp.engine import Simulation
from phtccp.mac import (ChannelModel, MacClassParams, MacState, default_class_params, frame_airtime,
                        next_cw, overlapping_conflicts, uncontended_service_time)

CH = ChannelModel()


def line_scenario(positions, parents, **kw):
    base = dict(n_nodes=len(positions), positions=positions, parents=parents, sources=[], n_sources=0,
                mode="none", duration=5.0)
    base.update(kw)
    return Scenario(**base)


def test_frame_airtime():
    assert frame_airtime(33, CH) == pytest.approx(8.25e-3, rel=1e-12)
    assert frame_airtime(3, CH) == pytest.approx(0.75e-3, rel=1e-12)
    assert frame_airtime(0, CH) == 0
    with pytest.raises(ValueError):
        frame_airtime(-1, CH)
    with pytest.raises(ValueError):
        ChannelModel(bit_rate=0)


def test_exchange_costs():
    assert CH.exchange_time(33) == pytest.approx(3 * 0.75e-3 + 8.25e-3 + 3 * 0.5e-3)
    assert CH.exchange_bytes(33) == 42
    assert CH.handshake_time() == pytest.approx(2 * 0.75e-3 + 0.5e-3)


def test_default_params_order_by_priority():
    p = default_class_params((3, 2, 1), CH)
    assert [(x.aifs_us, x.cw_min) for x in p] == [(2000, 7), (3000, 15), (4000, 31)]
    q = default_class_params((1, 3, 2), CH)
    assert q[1].cw_min == 7 and q[0].cw_min == 31


@given(st.lists(st.integers(1, 20), min_size=1, max_size=6))
def test_params_monotone_in_priority(alphas):
    p = default_class_params(alphas, CH)
    for i, a in enumerate(alphas):
        for j, b in enumerate(alphas):
            if a > b:
                assert p[i].aifs_us <= p[j].aifs_us and p[i].cw_min <= p[j].cw_min


def test_contention_window_growth_is_capped():
    params = MacClassParams(2000, 7, cw_max=40, pf=2.0)
    cw = params.cw_min
    seen = []
    for _ in range(5):
        cw = next_cw(cw, params)
        seen.append(cw)
    assert seen == [14, 28, 40, 40, 40]
    with pytest.raises(ValueError):
        MacClassParams(2000, 10, cw_max=5)


def test_freeze_keeps_remaining_slots():
    m = MacState(slots=5)
    fire = m.arm(0.0, 0.002, 0.001)
    assert fire == pytest.approx(0.007)
    m.freeze(0.0045, 0.001)
    assert m.slots == 3
    m.busy_until = 0.010
    assert m.arm(0.005, 0.002, 0.001) == pytest.approx(0.015)


def test_single_node_service_time_closed_form():
    sc = line_scenario([[0, 0], [10, 0]], [None, 0])
    sim = Simulation(sc, record_exchanges=True)
    sim.inject(1, 1, 0.0)
    log = sim.run()
    backoff = random.Random(f"mac:{sc.seed}").randint(0, 7)
    expected = uncontended_service_time(sim.mac_params[0], sim.ch, backoff, 33)
    (meas,) = sim.nodes[1].mac.measurements
    assert meas.inst_service_time == pytest.approx(expected, abs=1e-12)
    assert log.total_delivered == 1 and log.tx_bytes == 42


def test_zero_backlog_means_no_exchanges():
    sim = Simulation(line_scenario([[0, 0], [10, 0]], [None, 0]), record_exchanges=True)
    log = sim.run()
    assert log.exchange_log == [] and log.tx_bytes == 0


def test_priority_wins_contention_most_of_the_time():
    # two siblings of the sink, in range of each other; node 1 sends class 1, node 2 class 3
    wins = 0
    for trial in range(1000):
        sc = line_scenario([[0, 0], [10, 0], [0, 10]], [None, 0, 0], seed=trial, duration=0.2)
        sim = Simulation(sc, record_exchanges=True)
        sim.inject(1, 1, 0.0)
        sim.inject(2, 3, 0.0)
        log = sim.run()
        first = min((r for r in log.exchange_log if r[4]), key=lambda r: r[0])
        wins += first[2] == 1
    assert wins > 500


def test_priority_monotone_grants_when_saturated():
    sc = line_scenario([[0, 0], [10, 0]], [None, 0], sources=[1], r_or_init=1200, r_or_max=400, duration=250.0)
    sim = Simulation(sc)
    log = sim.run()
    g = log.class_grants
    assert sum(g) >= 10_000
    assert g[0] >= g[1] >= g[2]


def test_service_time_lower_bound_in_default_run():
    sim = simulate("phtccp", 1, record=True)
    floor = 3 * frame_airtime(3, sim.ch) + frame_airtime(33, sim.ch)
    times = [m.inst_service_time for n in sim.nodes for m in n.mac.measurements]
    assert times and min(times) >= floor


def test_no_overlapping_successful_conflicts():
    sim = simulate("none", 1, record=True)
    log = sim.log.exchange_log
    assert sum(1 for r in log if r[4]) > 500
    assert overlapping_conflicts(log, sim.nbrs) == []


def test_overlapping_conflicts_detects_violations():
    nbrs = [{1, 2}, {0, 2}, {0, 1}]
    log = [(0.0, 0.01, 1, 0, True), (0.005, 0.02, 2, 0, True), (0.03, 0.04, 1, 0, True)]
    assert len(overlapping_conflicts(log, nbrs)) == 1
