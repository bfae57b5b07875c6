import math
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coauthnet import METRIC_NAMES
from coauthnet.metrics import (
    average_clustering, average_path_length, burt_constraint_avg, collaboration_rate, compute_all,
    core_numbers, coreness_ratio, degree_assortativity, degree_centralization, effective_size_avg,
    modularity, modularity_partition, node_constraints, node_effective_sizes, random_lcc,
    read_metrics, repeated_collab_rate, robustness_ratio, small_world_coefficient, targeted_lcc,
    write_metrics, MetricVector,
)
from coauthnet.netbuild import TopicNetwork

from conftest import fixture_graphs, net_of
from oracles import brute_force_max_modularity, constraint_formula, effective_size_unweighted, freeman, peel_cores

TOL = 1e-9


def test_collaboration_rate_examples():
    g = nx.Graph()
    assert collaboration_rate(TopicNetwork(0, g, 1, 3)) == 0.75
    assert collaboration_rate(TopicNetwork(0, g, 4, 0)) == 0.0
    assert collaboration_rate(TopicNetwork(0, g, 0, 4)) == 1.0
    assert collaboration_rate(TopicNetwork(0, g, 0, 0)) is None


@pytest.mark.parametrize("weights,expected", [([2, 1, 1, 1], 0.25), ([1, 1], 0.0), ([2, 3], 1.0), ([], None)])
def test_repeated_collab_examples(weights, expected):
    g = nx.Graph()
    for i, w in enumerate(weights):
        g.add_edge(f"a{i}", f"b{i}", weight=w)
    assert repeated_collab_rate(TopicNetwork(0, g)) == expected


def test_centralization_examples():
    assert degree_centralization(nx.star_graph(4)) == (1.0, True)
    assert degree_centralization(nx.cycle_graph(7)) == (0.0, True)
    assert degree_centralization(nx.path_graph(4))[0] == pytest.approx(1 / 3, abs=TOL)
    assert degree_centralization(nx.complete_graph(2)) == (0.0, False)


def test_assortativity_examples():
    assert degree_assortativity(nx.complete_graph(5)) is None
    assert degree_assortativity(nx.star_graph(5)) == pytest.approx(-1.0, abs=TOL)
    assert degree_assortativity(nx.Graph([(0, 1), (2, 3)])) is None


def test_modularity_examples():
    two = nx.Graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    parts, q = modularity_partition(two)
    assert sorted(map(sorted, parts)) == [[0, 1, 2], [3, 4, 5]] and q == pytest.approx(0.5, abs=TOL)
    assert modularity_partition(nx.complete_graph(2))[1] == pytest.approx(0.0, abs=TOL)
    assert modularity_partition(nx.complete_graph(6))[1] == pytest.approx(0.0, abs=TOL)
    assert modularity_partition(nx.empty_graph(3))[1] is None


def test_small_world_examples():
    two = nx.Graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert small_world_coefficient(two) == pytest.approx(math.log(3) / math.log(2), abs=TOL)
    assert small_world_coefficient(nx.path_graph(3)) == pytest.approx(0.0, abs=TOL)
    assert small_world_coefficient(nx.complete_graph(2)) is None


def test_small_world_equal_to_null_is_one():
    # K_n: C = C_rand = 1 and L = 1; L_rand = ln n / ln(n-1) differs, so scale by hand
    g = nx.complete_graph(5)
    c_rand, l_rand = 1.0, math.log(5) / math.log(4)
    assert small_world_coefficient(g) == pytest.approx((1 / c_rand) / (1 / l_rand), abs=TOL)


def test_coreness_examples():
    assert coreness_ratio(nx.complete_graph(4)) == 1.0
    assert coreness_ratio(nx.Graph([(0, 1), (1, 2), (0, 2), (2, 3)])) == 0.75
    assert coreness_ratio(nx.empty_graph(4)) == 1.0
    assert coreness_ratio(nx.Graph()) is None


def test_robustness_examples():
    star = nx.star_graph(9)
    assert targeted_lcc(star) == 1
    assert robustness_ratio(nx.complete_graph(10), trials=10, seed=1) == 1.0
    a = robustness_ratio(star, trials=1000, seed=42)
    b = robustness_ratio(star, trials=1000, seed=42)
    assert a == b and a < 1
    # one node removed at random: hub with p = 0.1 (LCC 1), else a leaf (LCC 9)
    assert random_lcc(star, trials=1000, seed=42) == pytest.approx(0.1 * 1 + 0.9 * 9, abs=0.5)


def test_constraint_examples():
    assert burt_constraint_avg(nx.complete_graph(2)) == pytest.approx(1.0, abs=TOL)
    k = 5
    assert node_constraints(nx.star_graph(k))[0] == pytest.approx(1 / k, abs=TOL)
    assert node_constraints(nx.complete_graph(3))[0] == pytest.approx(1.125, abs=TOL)
    assert burt_constraint_avg(nx.empty_graph(3)) is None


def test_effective_size_examples():
    assert effective_size_avg(nx.star_graph(4)) == pytest.approx(1.6, abs=TOL)
    assert effective_size_avg(nx.complete_graph(2)) == pytest.approx(1.0, abs=TOL)
    assert effective_size_avg(nx.complete_graph(3)) == pytest.approx(1.0, abs=TOL)


def test_isolates_excluded_from_brokerage():
    g = nx.complete_graph(3)
    g.add_node("iso")
    assert burt_constraint_avg(g) == pytest.approx(1.125, abs=TOL)
    assert "iso" not in node_effective_sizes(g)


# -- oracle sweep over the fixture graphs ------------------------------------------------

@pytest.mark.filterwarnings("ignore:An input array is constant")
@pytest.mark.parametrize("name", sorted(fixture_graphs()))
def test_fixture_graph_oracles(name):
    g = fixture_graphs()[name]
    n = g.number_of_nodes()
    if n >= 3:
        assert degree_centralization(g)[0] == pytest.approx(freeman(g), abs=TOL)
    r = degree_assortativity(g)
    try:
        expected = nx.degree_pearson_correlation_coefficient(g)
    except Exception:
        expected = float("nan")
    if r is None:
        assert expected is None or not np.isfinite(expected)
    else:
        assert r == pytest.approx(expected, abs=TOL)
    assert core_numbers(g) == peel_cores(g) == nx.core_number(g)
    assert average_clustering(g) == pytest.approx(nx.average_clustering(g), abs=TOL)
    _, q = modularity_partition(g)
    assert q == pytest.approx(brute_force_max_modularity(g), abs=TOL)
    for i in g:
        assert node_constraints(g)[i] == pytest.approx(constraint_formula(g, i), abs=TOL)
        assert node_effective_sizes(g)[i] == pytest.approx(effective_size_unweighted(g, i), abs=1e-12)
    lcc = g.subgraph(max(nx.connected_components(g), key=len))
    assert average_path_length(lcc) == pytest.approx(nx.average_shortest_path_length(lcc), abs=TOL)


def _random_graph(rng, n_max=8):
    n = rng.randint(2, n_max)
    p = rng.uniform(0.2, 0.8)
    g = nx.gnp_random_graph(n, p, seed=rng.randint(0, 10**6))
    if g.number_of_edges() == 0:
        g.add_edge(0, 1)
    for u, v in g.edges:
        g[u][v]["weight"] = rng.randint(1, 3)
    return g


def test_modularity_never_exceeds_brute_force():
    rng = random.Random(7)
    hits = 0
    for _ in range(100):
        g = _random_graph(rng)
        parts, q = modularity_partition(g)
        best = brute_force_max_modularity(g)
        assert q <= best + TOL
        assert q == pytest.approx(modularity(g, parts), abs=1e-12)
        assert q >= max(0.0, modularity(g, [{u} for u in g])) - TOL
        hits += abs(q - best) <= TOL
    assert hits >= 90


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_weighted_brokerage_matches_networkx(seed):
    g = _random_graph(random.Random(seed), 12)
    ours_c, ours_e = node_constraints(g), node_effective_sizes(g)
    ref_c = nx.constraint(g, weight="weight")
    ref_e = nx.effective_size(g, weight="weight")
    for u in g:
        if g.degree(u) == 0:
            continue
        assert ours_c[u] == pytest.approx(ref_c[u], abs=1e-12)
        assert ours_e[u] == pytest.approx(ref_e[u], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_unweighted_effective_size_duality(seed):
    g = _random_graph(random.Random(seed), 12)
    for u, v in g.edges:
        g[u][v]["weight"] = 1
    eff = node_effective_sizes(g)
    for u in eff:
        assert eff[u] == pytest.approx(effective_size_unweighted(g, u), abs=1e-12)


def test_order_preserving_relabel_invariance():
    rng = random.Random(3)
    for _ in range(10):
        g = _random_graph(rng, 10)
        h = nx.relabel_nodes(g, {u: f"n{u:03d}" for u in g})
        a = compute_all(net_of(g), seed=4).values
        b = compute_all(net_of(h), seed=4).values
        for k in METRIC_NAMES:
            assert (a[k] is None and b[k] is None) or a[k] == pytest.approx(b[k], abs=1e-12)


def test_targeted_not_above_random_on_scale_free():
    for s in range(5):
        g = nx.barabasi_albert_graph(300, 2, seed=s)
        assert targeted_lcc(g) <= random_lcc(g, trials=100, seed=s) + 1e-9


def test_path_sampling_is_seeded():
    g = nx.barabasi_albert_graph(400, 3, seed=1)
    a = average_path_length(g, 200, seed=5)
    assert a == average_path_length(g, 200, seed=5)
    assert a == pytest.approx(nx.average_shortest_path_length(g), rel=0.05)


def test_compute_all_cases():
    empty = compute_all(TopicNetwork(0, nx.Graph()), 0)
    assert all(v is None for v in empty.values.values())
    dyad = compute_all(net_of(nx.complete_graph(2)), 0)
    assert dyad["collaboration_rate"] == 1.0 and dyad["degree_centralization"] == 0.0
    two = compute_all(net_of(nx.Graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])), 0)
    assert two["modularity"] == pytest.approx(0.5)
    assert two["small_world"] == pytest.approx(math.log(3) / math.log(2))
    assert two["coreness_ratio"] == 1.0
    assert two["avg_constraint"] == pytest.approx(1.125)
    assert two["avg_effective_size"] == pytest.approx(1.0)


RANGES = {
    "collaboration_rate": (0, 1), "repeated_collab_rate": (0, 1), "degree_centralization": (0, 1),
    "degree_assortativity": (-1, 1), "modularity": (-0.5, 1), "small_world": (0, math.inf),
    "coreness_ratio": (0, 1), "robustness_ratio": (0, math.inf), "avg_constraint": (0, math.inf),
    "avg_effective_size": (0, math.inf),
}


def test_defined_values_in_range():
    rng = random.Random(11)
    for _ in range(40):
        vec = compute_all(net_of(_random_graph(rng, 15)), seed=1)
        for k, (lo, hi) in RANGES.items():
            v = vec[k]
            if v is not None:
                assert lo - 1e-12 <= v <= hi + 1e-12, (k, v)


def test_metrics_csv_roundtrip(tmp_path):
    vecs = [compute_all(net_of(nx.star_graph(4), topic=2), 0), compute_all(TopicNetwork(1, nx.Graph()), 0)]
    path = tmp_path / "m.csv"
    write_metrics(vecs, path)
    header = path.read_text().splitlines()[0]
    assert header == ("topic_id,n_authors,n_papers,collaboration_rate,repeated_collab_rate,degree_centralization,"
                      "degree_assortativity,modularity,small_world,coreness_ratio,robustness_ratio,avg_constraint,"
                      "avg_effective_size")
    back = {v.topic_id: v for v in read_metrics(path)}
    assert back[2].values == vecs[0].values
    assert all(v is None for v in back[1].values.values())
