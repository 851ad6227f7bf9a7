import pytest
from hypothesis import given, settings, strategies as st

from phtccp.topology import (
    SINK,
    ActivitySchedule,
    ConfigurationError,
    Deployment,
    RoutingTree,
    TopologyError,
    active_children,
    build_tree,
    generate_deployment,
)

# sink A, then B..H; B has three children, D has two, H none
NETWORK_MODEL = {
    "A": (0.0, 0.0), "B": (20.0, 0.0), "C": (-20.0, 0.0),
    "D": (45.0, 0.0), "E": (38.0, 18.0), "F": (38.0, -18.0),
    "G": (70.0, 5.0), "H": (70.0, -5.0),
}


def _model_tree():
    names = list(NETWORK_MODEL)
    dep = Deployment(tuple(NETWORK_MODEL.values()), (100.0, 100.0), 30.0)
    return names, build_tree(dep)


def test_default_deployment_is_connected_and_in_bounds():
    dep = generate_deployment(100, (100.0, 100.0), 30.0, seed=1)
    assert dep.n_nodes == 100
    assert all(0 <= x <= 100 and 0 <= y <= 100 for x, y in dep.positions)
    tree = build_tree(dep)
    assert len(tree.depth) == 100


def test_single_node_deployment():
    dep = generate_deployment(1, (10.0, 10.0), 1.0, seed=3)
    tree = build_tree(dep)
    assert tree.depth == {SINK: 0}
    assert tree.children[SINK] == ()


def test_deployment_is_deterministic():
    a = generate_deployment(100, (100.0, 100.0), 30.0, seed=9)
    b = generate_deployment(100, (100.0, 100.0), 30.0, seed=9)
    assert a == b
    assert a != generate_deployment(100, (100.0, 100.0), 30.0, seed=10)


def test_unreachable_field_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        generate_deployment(5, (1000.0, 1000.0), 0.001, seed=1)


def test_bad_parameters_rejected():
    with pytest.raises(ConfigurationError):
        generate_deployment(0, (10.0, 10.0), 1.0, seed=1)
    with pytest.raises(ConfigurationError):
        generate_deployment(3, (10.0, 10.0), -1.0, seed=1)


def test_line_gives_chain():
    dep = Deployment(((0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (30.0, 0.0)), (40.0, 1.0), 12.0)
    tree = build_tree(dep)
    assert [tree.depth[i] for i in range(4)] == [0, 1, 2, 3]
    assert tree.path_to_sink(3) == [3, 2, 1, 0]


def test_star_gives_depth_one():
    pos = ((50.0, 50.0), (55.0, 50.0), (45.0, 50.0), (50.0, 55.0), (50.0, 45.0))
    tree = build_tree(Deployment(pos, (100.0, 100.0), 10.0))
    assert all(tree.depth[i] == 1 for i in range(1, 5))


def test_network_model_child_counts():
    names, tree = _model_tree()
    idx = {n: i for i, n in enumerate(names)}
    assert tree.child_count(idx["B"]) == 3
    assert tree.child_count(idx["D"]) == 2
    assert tree.child_count(idx["H"]) == 0


def test_parent_tie_break_prefers_nearer_then_lower_id():
    # nodes 1 and 2 are both one hop from the sink; 3 reaches both
    pos = ((0.0, 0.0), (10.0, 10.0), (10.0, -10.0), (28.0, 0.0))
    tree = build_tree(Deployment(pos, (50.0, 50.0), 22.0))
    assert tree.depth[3] == 2
    assert tree.parent[3] == 1
    pos = ((0.0, 0.0), (10.0, 10.0), (10.0, -9.0), (28.0, 0.0))
    tree = build_tree(Deployment(pos, (50.0, 50.0), 22.0))
    assert tree.parent[3] == 2


def test_disconnected_deployment_names_stranded_nodes():
    dep = Deployment(((0.0, 0.0), (1.0, 0.0), (90.0, 90.0)), (100.0, 100.0), 5.0)
    with pytest.raises(TopologyError) as err:
        build_tree(dep)
    assert err.value.stranded == (2,)


def test_tree_round_trip_through_parents():
    _, tree = _model_tree()
    again = RoutingTree.from_parents(tree.to_dict()["parents"])
    assert again == tree
    dep = Deployment(tuple(NETWORK_MODEL.values()), (100.0, 100.0), 30.0)
    assert Deployment.from_dict(dep.to_dict()) == dep


def test_active_children_follows_schedule():
    names, tree = _model_tree()
    b = names.index("B")
    kids = list(tree.children[b])
    assert active_children(tree, ActivitySchedule(), b, 1.0) == kids
    sched = ActivitySchedule({kids[0]: [(0.0, 5.0)], kids[1]: [(0.0, 5.0)]})
    assert active_children(tree, sched, b, 1.0) == kids[2:]
    assert active_children(tree, sched, b, 5.0) == kids
    assert active_children(tree, sched, names.index("H"), 1.0) == []


def test_schedule_rejects_overlap_and_sink():
    with pytest.raises(ConfigurationError):
        ActivitySchedule({1: [(0.0, 5.0), (4.0, 6.0)]})
    with pytest.raises(ConfigurationError):
        ActivitySchedule({SINK: [(0.0, 1.0)]})
    with pytest.raises(ConfigurationError):
        ActivitySchedule({2: [(3.0, 3.0)]})


def test_toggles_are_time_ordered():
    sched = ActivitySchedule({3: [(30.0, 50.0)], 1: [(10.0, 20.0)]})
    assert sched.toggles() == [(10.0, 1, False), (20.0, 1, True), (30.0, 3, False), (50.0, 3, True)]


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 60), seed=st.integers(0, 10_000), rng=st.floats(15.0, 40.0))
def test_tree_properties(n, seed, rng):
    dep = generate_deployment(n, (100.0, 100.0), rng, seed)
    tree = build_tree(dep)
    assert sum(tree.child_count(p) for p in tree.nodes) == n - 1
    for i in range(1, n):
        path = tree.path_to_sink(i)
        assert len(path) <= n
        assert len(path) - 1 == tree.depth[i]
        assert i in tree.children[tree.parent[i]]
        # links are symmetric unit-disk edges
        assert dep.in_range(i, tree.parent[i]) and dep.in_range(tree.parent[i], i)


@settings(max_examples=25, deadline=None)
@given(spans=st.lists(st.tuples(st.floats(0, 50), st.floats(0.1, 10)), max_size=5), t=st.floats(0, 60))
def test_active_count_never_exceeds_children(spans, t):
    names, tree = _model_tree()
    b = names.index("B")
    kid = tree.children[b][0]
    sched_spans, end = [], 0.0
    for start, width in sorted(spans):
        start = max(start, end)
        sched_spans.append((start, start + width))
        end = start + width
    sched = ActivitySchedule({kid: sched_spans})
    assert len(active_children(tree, sched, b, t)) <= tree.child_count(b)
