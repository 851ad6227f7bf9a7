import filecmp

import pytest

from conftest import simulate
from phtccp import Scenario, ScenarioError
from phtccp.engine import EventKind, Simulation, counted_active, run
from phtccp.queueing import weighted_avg_queue_length

# relay 1 sits under the sink and has four children 2..5
STAR = dict(
    n_nodes=6,
    positions=[[0, 0], [20, 0], [40, 0], [30, 15], [30, -15], [45, 10]],
    parents=[None, 0, 1, 1, 1, 1],
    tx_range=30.0,
)


def small(**kw):
    base = dict(STAR, sources=[], n_sources=0, duration=5.0)
    base.update(kw)
    return Scenario(**base)


def test_single_hop_source_generates_alpha_shares():
    sc = Scenario(n_nodes=2, positions=[[0, 0], [10, 0]], parents=[None, 0], sources=[1], mode="none")
    log = run(sc)
    assert log.generated == [120, 80, 40]
    assert log.conservation_gap() == 0
    assert log.total_delivered >= 235


def test_tiny_duration_delivers_nothing():
    log = run(Scenario(duration=0.001))
    assert log.total_delivered == 0 and log.total_generated == 0
    assert len(log.samples) == 1


@pytest.mark.parametrize("mode", ["phtccp", "ccf_lite", "none"])
@pytest.mark.parametrize("seed", [1, 2])
def test_packet_conservation(mode, seed):
    log = simulate(mode, seed).log
    assert log.total_generated > 0
    assert log.conservation_gap() == 0


def test_poisson_traffic_conserves():
    log = run(Scenario(traffic="poisson", duration=20.0))
    assert log.conservation_gap() == 0 and log.total_delivered > 0


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(Scenario(seed=3, duration=20.0)).write_csvs(a)
    run(Scenario(seed=3, duration=20.0)).write_csvs(b)
    match, mismatch, errors = filecmp.cmpfiles(a, b, ["timeseries.csv", "summary.csv", "nodes.csv"], shallow=False)
    assert not mismatch and not errors and len(match) == 3


def test_seeds_differ():
    assert simulate("phtccp", 1).log.summary() != simulate("phtccp", 2).log.summary()


def test_unknown_mode_rejected():
    with pytest.raises(ScenarioError):
        Scenario().replace(mode="tcp")


def test_causality_guard():
    sim = Simulation(small())
    sim.now = 2.0
    with pytest.raises(RuntimeError, match="causality"):
        sim.push(1.0, EventKind.METRICS_SAMPLE, 0)


def test_ccf_lite_splits_parent_service_rate_equally():
    sim = Simulation(small(mode="ccf_lite", idle_intervals={"4": [[0, 10]], "5": [[0, 10]]}))
    relay = sim.nodes[1]
    relay.rate.t_s = 1 / 12
    header = sim._header(relay, 0.0)
    assert header.r_sch == pytest.approx(12, abs=0.01) and header.child_count == 4
    for c in (2, 3):
        sim._on_overhear(c, header)
        assert sim.nodes[c].rate.r_sch == pytest.approx(3, abs=0.01)


def test_phtccp_active_children_share_idle_capacity():
    sim = Simulation(small())
    relay = sim.nodes[1]
    relay.rate.r_sch = 12.0
    units = 2 * 256
    for c in (2, 3):
        relay.child_records[c].heard(0.9, 3.0, units)
        sim.nodes[c].self_record.heard(0.9, 3.0, units)
    sim.now = 1.0
    header = sim._header(relay, 1.0)
    assert (header.child_count, header.active_child_count) == (4, 2)
    got = []
    for c in (2, 3):
        sim._on_overhear(c, header)
        got.append(sim.nodes[c].rate.r_sch)
    assert got == pytest.approx([6.0, 6.0], abs=0.01)
    assert sum(got) == pytest.approx(12.0, abs=0.01)


def test_overhear_deliveries_follow_awake_neighbours():
    sim = Simulation(small())
    assert sim.nbrs[1] == {0, 2, 3, 4, 5}
    sim.inject(1, 1, 0.0)
    assert sim.run().overhear_deliveries == 4
    sim = Simulation(small(idle_intervals={"2": [[0, 10]]}))
    sim.inject(1, 1, 0.0)
    assert sim.run().overhear_deliveries == 3
    lone = Simulation(Scenario(n_nodes=2, positions=[[0, 0], [10, 0]], parents=[None, 0], sources=[], mode="none"))
    lone.inject(1, 1, 0.0)
    assert lone.run().overhear_deliveries == 0


def test_inject_counts_as_generated():
    sim = Simulation(small(mode="none"))
    sim.inject(3, 2, 0.0)
    sim.inject(3, 1, 0.0)
    log = sim.run()
    assert log.generated == [1, 1, 0]
    assert log.delivered == [1, 1, 0]
    assert log.hop_sum == 4


def test_counted_active_timeout():
    assert not counted_active(None, None, 4.0, 1.0, 2.0)
    assert counted_active(0.5, None, 4.0, 1.0, 2.0)
    assert not counted_active(0.0, None, 4.0, 1.0, 2.0)
    # a long observed gap stretches the window
    assert counted_active(0.0, 1.0, 4.0, 1.5, 2.0)


def test_sources_are_deepest_nodes_and_probe_is_sink_child():
    sim = simulate("phtccp", 1)
    depths = sorted((sim.tree.depth[i] for i in range(1, sim.n_nodes)), reverse=True)
    assert sorted((sim.tree.depth[s] for s in sim.sources), reverse=True) == depths[:10]
    assert sim.tree.parent[sim.probe] == 0


def test_idle_fraction_picks_relays():
    sim = Simulation(Scenario(idle_fraction=0.3))
    relays = sim.on_source_path() - set(sim.sources)
    idle = set(sim.schedule.intervals)
    assert idle and idle <= relays
    assert len(idle) == round(0.3 * len(relays))


def test_queue_average_tracks_scheduler():
    sim = simulate("none", 1)
    for node in sim.nodes:
        assert node.avg_q == pytest.approx(weighted_avg_queue_length(node.sched, sim.alphas))


def test_allocation_checked_at_adjustment_instants():
    log = simulate("phtccp", 1).log
    assert log.adjustment_instants > 100
    assert log.max_phi_error <= 1e-9
    assert log.max_conservation_error <= 1e-9
