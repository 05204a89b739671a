import math

import pytest

from transitvuln import build_path_cache, fixtures
from transitvuln.demand import ODMatrix
from transitvuln.errors import UnknownStationError
from transitvuln.metrics import (
    compute_bin_arrays,
    compute_bin_metrics,
    demand_closeness,
    flow_betweenness,
    importance,
    line_importance,
    topo_metrics,
    weighted_degree,
)

import bruteforce
from graphgen import random_flows, random_line_network


def _od(g, flows):
    return ODMatrix.from_flows(fixtures.service_bin(), flows)


def test_weighted_degree_cross7(cross7, cross7_cache, single_od):
    assert weighted_degree(cross7, single_od, cross7_cache, 3) == 20.0
    assert weighted_degree(cross7, single_od, cross7_cache, 1) == 10.0
    assert weighted_degree(cross7, single_od, cross7_cache, 7) == 0.0


def test_weighted_degree_zero_demand_and_linearity(cross7, cross7_cache):
    empty = _od(cross7, {})
    for sid in cross7.station_ids:
        assert weighted_degree(cross7, empty, cross7_cache, sid) == 0.0
    od1 = _od(cross7, {(1, 6): 10.0})
    od2 = _od(cross7, {(1, 6): 20.0})
    for sid in cross7.station_ids:
        assert weighted_degree(cross7, od2, cross7_cache, sid) == pytest.approx(
            2 * weighted_degree(cross7, od1, cross7_cache, sid)
        )


def test_flow_betweenness_cross7(cross7, cross7_cache, single_od):
    assert flow_betweenness(cross7, single_od, cross7_cache, 3) == 1.0
    assert flow_betweenness(cross7, single_od, cross7_cache, 2) == 1.0
    assert flow_betweenness(cross7, single_od, cross7_cache, 1) == 0.0


def test_flow_betweenness_diamond_split():
    g = fixtures.diamond()
    cache = build_path_cache(g)
    od = _od(g, {(1, 4): 8.0})
    assert flow_betweenness(g, od, cache, 2) == 0.5
    assert flow_betweenness(g, od, cache, 3) == 0.5


def test_demand_closeness_cross7(cross7, cross7_cache, single_od):
    assert demand_closeness(cross7, single_od, cross7_cache, 1) == 0.6
    assert math.isinf(demand_closeness(cross7, single_od, cross7_cache, 4))
    doubled = _od(cross7, {(1, 6): 20.0})
    assert demand_closeness(cross7, doubled, cross7_cache, 1) == 0.3


def test_importance_cross7(cross7, cross7_cache, single_od):
    assert importance(cross7, single_od, cross7_cache, 3) == 1.0
    assert importance(cross7, single_od, cross7_cache, 2) == 1.0
    assert importance(cross7, single_od, cross7_cache, 4) == 0.0
    # no demand: defined as zero
    assert importance(cross7, _od(cross7, {}), cross7_cache, 3) == 0.0


def test_importance_bounds(cross7, cross7_cache, single_od):
    arrays = compute_bin_arrays(cross7, single_od, cross7_cache)
    assert all(0.0 <= z <= 3.0 for z in arrays.importance)
    # this demand keeps the three passenger groups disjoint per station
    assert all(z <= 1.0 for z in arrays.importance)


@pytest.mark.parametrize("seed", range(6))
def test_importance_bounds_random(seed):
    g = random_line_network(seed)
    cache = build_path_cache(g)
    od = _od(g, random_flows(g, seed))
    arrays = compute_bin_arrays(g, od, cache)
    assert all(0.0 <= z <= 3.0 + 1e-12 for z in arrays.importance)


def test_importance_monotone_under_extra_passing_trip(cross7, cross7_cache):
    # Restricted regime where monotonicity is provable: the station carries no
    # origin/destination flow of its own and the added trip's endpoints are
    # already active, so the active-station count is unchanged.
    base = {(1, 6): 10.0, (1, 2): 5.0, (2, 6): 1.0}
    before = importance(cross7, _od(cross7, base), cross7_cache, 3)
    more = dict(base)
    more[(2, 6)] = 4.0  # passes through X (a2 -> X -> b2)
    after = importance(cross7, _od(cross7, more), cross7_cache, 3)
    assert after >= before


def test_importance_scaling_preserves_ranking(cross7, cross7_cache):
    flows = {(1, 6): 10.0, (5, 4): 3.0, (2, 7): 1.0}
    a = compute_bin_arrays(cross7, _od(cross7, flows), cross7_cache).importance
    b = compute_bin_arrays(
        cross7, _od(cross7, {k: 7.0 * v for k, v in flows.items()}), cross7_cache
    ).importance
    rank_a = sorted(range(len(a)), key=lambda i: (-a[i], i))
    rank_b = sorted(range(len(b)), key=lambda i: (-b[i], i))
    assert rank_a == rank_b


def test_unknown_station_raises(cross7, cross7_cache, single_od):
    with pytest.raises(UnknownStationError):
        importance(cross7, single_od, cross7_cache, 42)


def test_stale_cache_rejected(cross7, cross7_cache, single_od):
    from transitvuln import remove_stations
    from transitvuln.errors import ValidationError

    shrunk = remove_stations(cross7, {7})
    with pytest.raises(ValidationError, match="graph version"):
        compute_bin_arrays(shrunk, single_od, cross7_cache)


@pytest.mark.parametrize("seed", range(8))
def test_metrics_match_bruteforce(seed):
    g = random_line_network(seed + 20)
    cache = build_path_cache(g, k=64)
    flows = random_flows(g, seed, density=0.4)
    od = _od(g, flows)
    arrays = compute_bin_arrays(g, od, cache)
    rs = bruteforce.all_reasonable(g)
    for i, sid in enumerate(g.station_ids):
        assert arrays.weighted_degree[i] == pytest.approx(
            bruteforce.weighted_degree(g, flows, sid, rs), abs=1e-9
        )
        assert arrays.flow_betweenness[i] == pytest.approx(
            bruteforce.flow_betweenness(g, flows, sid, rs), abs=1e-9
        )
        expected_c = bruteforce.demand_closeness(g, flows, sid)
        if math.isinf(expected_c):
            assert math.isinf(arrays.demand_closeness[i])
        else:
            assert arrays.demand_closeness[i] == pytest.approx(expected_c, abs=1e-9)
        assert arrays.importance[i] == pytest.approx(
            bruteforce.importance(g, flows, sid, rs), abs=1e-9
        )


def test_topo_metrics_cross7(cross7):
    topo = topo_metrics(cross7)
    assert topo[3][0] == 4
    assert topo[1][0] == 1
    for sid in cross7.station_ids:
        assert topo[sid][1] == pytest.approx(bruteforce.topo_betweenness(cross7, sid), abs=1e-12)


def test_topo_betweenness_path3():
    from transitvuln.network import Edge, Station, new_graph

    stations = [Station(i, f"s{i}", frozenset({"A"}), False) for i in (1, 2, 3)]
    g = new_graph(stations, [Edge(1, 2, "A", 1.0), Edge(2, 3, "A", 1.0)])
    topo = topo_metrics(g)
    assert topo[2][1] == 1.0
    assert topo[1][1] == 0.0


def test_line_importance_cross7(cross7, cross7_cache, single_od):
    rows = compute_bin_metrics(cross7, single_od, cross7_cache)
    agg = line_importance(rows, cross7)
    # line A members {a1, a2, X, a3}: importance (0.5 + 1.0 + 1.0 + 0.0)/4
    assert agg["A"].mean_importance == pytest.approx(0.625)
    assert agg["B"].mean_importance == pytest.approx(0.375)
    # a2, X, a3 originate nothing: line closeness is infinite
    assert math.isinf(agg["A"].mean_closeness)
    assert agg["A"].total_weighted_degree == pytest.approx(10 + 20 + 20 + 0)


def test_line_importance_single_line_equals_station_means():
    from transitvuln.network import Edge, Station, new_graph

    stations = [Station(i, f"s{i}", frozenset({"A"}), False) for i in (1, 2, 3)]
    g = new_graph(stations, [Edge(1, 2, "A", 1.0), Edge(2, 3, "A", 1.0)])
    cache = build_path_cache(g)
    od = _od(g, {(1, 3): 6.0})
    rows = compute_bin_metrics(g, od, cache)
    agg = line_importance(rows, g)["A"]
    assert agg.mean_importance == pytest.approx(sum(r.importance for r in rows) / 3)
    assert agg.total_weighted_degree == pytest.approx(sum(r.weighted_degree for r in rows))
