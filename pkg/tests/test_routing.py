import math

import pytest

from transitvuln import (
    build_path_cache,
    fixtures,
    k_shortest_paths,
    load_cache,
    reasonable_paths,
    remove_stations,
    save_cache,
    shortest_time_matrix,
)
from transitvuln.errors import UnknownStationError, UnreachableError, ValidationError
from transitvuln.routing import graph_fingerprint, split_weights

import bruteforce
from graphgen import random_line_network


def test_cross7_same_line_path(cross7):
    paths = k_shortest_paths(cross7, 1, 4, 3)
    assert len(paths) == 1
    p = paths[0]
    assert p.stations == (1, 2, 3, 4)
    assert p.total_time == 6.0
    assert p.transfer_count == 0
    assert p.transfer_time == 0.0


def test_cross7_cross_line_path(cross7):
    paths = k_shortest_paths(cross7, 1, 6, 3)
    assert len(paths) == 1
    p = paths[0]
    assert p.ride_time == 7.0
    assert p.transfer_count == 1
    assert p.transfer_time == 5.0
    assert p.total_time == 12.0


def test_unreachable_pair_empty(cross7):
    broken = remove_stations(cross7, {3})
    assert k_shortest_paths(broken, 1, 5, 3) == []
    with pytest.raises(UnreachableError):
        reasonable_paths(broken, 1, 5)


def test_errors_distinguishable(cross7):
    with pytest.raises(UnknownStationError):
        k_shortest_paths(cross7, 1, 99, 3)
    with pytest.raises(ValidationError):
        k_shortest_paths(cross7, 1, 4, 0)
    with pytest.raises(ValidationError):
        k_shortest_paths(cross7, 1, 1, 3)


def test_single_candidate_weight(cross7):
    rps = reasonable_paths(cross7, 1, 6)
    assert len(rps.paths) == 1
    assert rps.split_weights == (1.0,)


def test_diamond_equal_split():
    g = fixtures.diamond()
    rps = reasonable_paths(g, 1, 4)
    assert len(rps.paths) == 2
    assert rps.split_weights == (0.5, 0.5)
    assert {p.stations for p in rps.paths} == {(1, 2, 4), (1, 3, 4)}


def test_diamond_dominated_path_excluded():
    g = fixtures.diamond((5.0, 5.0, 6.0, 6.0))
    rps = reasonable_paths(g, 1, 4)
    assert len(rps.paths) == 1
    assert rps.paths[0].stations == (1, 2, 4)
    assert rps.split_weights == (1.0,)
    # but k-shortest still surfaces the slower route
    assert len(k_shortest_paths(g, 1, 4, 3)) == 2


def test_eps_time_widens_set_and_split_rules_differ():
    g = fixtures.diamond((5.0, 5.0, 6.0, 6.0))
    inverse = reasonable_paths(g, 1, 4, eps_time=2.5, split_rule="inverse")
    assert [p.total_time for p in inverse.paths] == [10.0, 12.0]
    assert inverse.split_weights == pytest.approx((6 / 11, 5 / 11))
    direct = reasonable_paths(g, 1, 4, eps_time=2.5, split_rule="proportional-direct")
    assert direct.split_weights == pytest.approx((10 / 22, 12 / 22))


def test_split_weights_validation():
    with pytest.raises(ValidationError):
        split_weights([1.0], "nope")
    assert sum(split_weights([3.0, 4.0, 5.0], "inverse")) == pytest.approx(1.0, abs=1e-12)


def test_k_stability(cross7):
    small = reasonable_paths(cross7, 1, 6, k=2)
    large = reasonable_paths(cross7, 1, 6, k=16)
    assert small.paths == large.paths
    g = fixtures.diamond()
    assert reasonable_paths(g, 1, 4, k=2).paths == reasonable_paths(g, 1, 4, k=12).paths


@pytest.mark.parametrize("seed", range(8))
def test_symmetry_of_total_time(seed):
    g = random_line_network(seed)
    ids, times = shortest_time_matrix(g)
    for i in range(len(ids)):
        for j in range(len(ids)):
            assert times[i, j] == times[j, i]


@pytest.mark.parametrize("seed", range(10))
def test_reasonable_matches_bruteforce(seed, backend):
    g = random_line_network(seed)
    ids = g.station_ids
    for o in ids:
        for d in ids:
            if o == d:
                continue
            expected_paths, expected_key = bruteforce.reasonable(g, o, d)
            if not expected_paths:
                with pytest.raises(UnreachableError):
                    reasonable_paths(g, o, d, k=64)
                continue
            rps = reasonable_paths(g, o, d, k=64)
            got = sorted(p.stations for p in rps.paths)
            assert got == expected_paths, (o, d)
            first = rps.paths[0]
            assert (first.total_time, first.transfer_count, first.transfer_time) == expected_key


@pytest.mark.parametrize("seed", range(10))
def test_cache_agrees_with_per_pair_query(seed, backend):
    g = random_line_network(seed + 50)
    cache = build_path_cache(g, k=8)
    for o in g.station_ids:
        for d in g.station_ids:
            if o == d:
                continue
            entry = cache.entry(o, d)
            try:
                rps = reasonable_paths(g, o, d, k=8)
            except UnreachableError:
                assert entry is None
                continue
            assert entry is not None
            assert entry.paths == tuple(p.stations for p in rps.paths)
            assert entry.total_time == rps.paths[0].total_time
            assert entry.weights == rps.split_weights


def test_cache_pass_through_cross7(cross7, cross7_cache):
    pairs = {(o, d) for o, d, _ in cross7_cache.pairs_through(3)}
    line_a = {1, 2, 4}
    line_b = {5, 6, 7}
    expected = {(o, d) for o in line_a for d in line_b}
    expected |= {(d, o) for o in line_a for d in line_b}
    # same-line pairs spanning X: a1/a2 to a3, and b1 to b2/b3
    expected |= {(1, 4), (4, 1), (2, 4), (4, 2), (5, 6), (6, 5), (5, 7), (7, 5)}
    assert pairs == expected
    assert cross7_cache.pairs_through(1) == ()
    assert len(cross7_cache.entries) == 42


def test_cache_identity_removal_same_content(cross7, cross7_cache):
    g2 = remove_stations(cross7, set())
    cache2 = build_path_cache(g2)
    assert cache2.graph_version != cross7_cache.graph_version
    assert cache2.entries == cross7_cache.entries


def test_cache_weights_sum_to_one(backend):
    g = random_line_network(3)
    cache = build_path_cache(g)
    for entry in cache.entries.values():
        assert math.isclose(sum(entry.weights), 1.0, abs_tol=1e-9)
        assert all(w > 0 for w in entry.weights)


def test_cache_build_worker_pool_equivalent(backend):
    g = random_line_network(7)
    serial = build_path_cache(g, workers=1)
    pooled = build_path_cache(g, workers=4)
    assert serial.entries == pooled.entries


def test_cache_save_load_roundtrip(tmp_path, cross7, cross7_cache):
    path = tmp_path / "cache.json.gz"
    save_cache(cross7_cache, path)
    loaded = load_cache(path, cross7)
    assert loaded.entries == cross7_cache.entries
    assert loaded.k == cross7_cache.k
    assert loaded.split_rule == cross7_cache.split_rule

    other = fixtures.diamond()
    with pytest.raises(ValidationError, match="different graph"):
        load_cache(path, other)
    assert graph_fingerprint(cross7) != graph_fingerprint(other)


def _loop_trap():
    """Fixture where the time-minimal walk revisits a station.

    The only loopless route a -> d transfers at X for 30 min; the cheaper walk
    loops through X twice via lines C and B (total 14 min) and must be
    rejected by the station-loopless search.
    """
    from transitvuln.network import Edge, Station, TransferArc, new_graph

    stations = [
        Station(1, "a", frozenset({"A"}), False),
        Station(2, "X", frozenset({"A", "B"}), True),
        Station(3, "b", frozenset({"A", "C"}), True),
        Station(4, "c", frozenset({"B", "C"}), True),
        Station(5, "d", frozenset({"B"}), False),
    ]
    edges = [
        Edge(1, 2, "A", 2.0),
        Edge(2, 3, "A", 2.0),
        Edge(3, 4, "C", 2.0),
        Edge(4, 2, "B", 2.0),
        Edge(2, 5, "B", 2.0),
    ]
    arcs = [
        TransferArc(2, "A", "B", 30.0),
        TransferArc(3, "A", "C", 2.0),
        TransferArc(4, "B", "C", 2.0),
    ]
    return new_graph(stations, edges, arcs)


def test_station_loop_fallback(backend):
    from transitvuln.routing import _dest_summary, _source_labels, expand, loopless_times_from

    g = _loop_trap()
    exp = expand(g)
    a_idx, d_idx = exp.id_to_idx[1], exp.id_to_idx[5]
    labels = _source_labels(exp, a_idx)
    _, _, _, status = _dest_summary(exp, a_idx, labels)
    # the optimal walk (14 min) loops through X; no loopless witness exists
    walk_best = min(labels[0][v] for v in exp.station_nodes(d_idx))
    assert walk_best == 14.0
    assert status[d_idx] == 2
    times = loopless_times_from(exp, a_idx)
    assert times[d_idx] == 34.0

    paths = k_shortest_paths(g, 1, 5, 5)
    assert [p.stations for p in paths] == [(1, 2, 5)]
    assert paths[0].total_time == 34.0
    assert paths[0].transfer_time == 30.0

    cache = build_path_cache(g)
    entry = cache.entry(1, 5)
    assert entry.paths == ((1, 2, 5),)
    assert entry.total_time == 34.0

    expected_paths, expected_key = bruteforce.reasonable(g, 1, 5)
    assert list(entry.paths) == expected_paths
    assert (entry.total_time, entry.transfer_count, entry.transfer_time) == expected_key


def test_station_loop_fallback_topo_metrics():
    from transitvuln.metrics import topo_metrics

    g = _loop_trap()
    topo = topo_metrics(g)
    for sid in g.station_ids:
        assert topo[sid][1] == pytest.approx(bruteforce.topo_betweenness(g, sid), abs=1e-12)


def test_asymmetric_transfer_times_break_symmetry(tmp_path):
    from transitvuln import load_network
    from transitvuln.network import Edge, Station, TransferArc, new_graph

    stations = [
        Station(1, "a", frozenset({"A"}), False),
        Station(2, "x", frozenset({"A", "B"}), True),
        Station(3, "b", frozenset({"B"}), False),
    ]
    edges = [Edge(1, 2, "A", 2.0), Edge(2, 3, "B", 2.0)]
    arcs = [TransferArc(2, "A", "B", 10.0), TransferArc(2, "B", "A", 1.0)]
    g = new_graph(stations, edges, arcs)

    forward = reasonable_paths(g, 1, 3).paths[0]
    backward = reasonable_paths(g, 3, 1).paths[0]
    assert forward.total_time == 14.0
    assert backward.total_time == 5.0
    assert forward.transfer_time == 10.0
    assert backward.transfer_time == 1.0

    # the loader preserves the two-row asymmetry
    paths = fixtures.write_network_csvs(g, tmp_path)
    loaded = load_network(*paths)
    assert reasonable_paths(loaded, 1, 3).paths[0].total_time == 14.0
    assert reasonable_paths(loaded, 3, 1).paths[0].total_time == 5.0

    expected_paths, expected_key = bruteforce.reasonable(g, 1, 3)
    assert expected_key == (14.0, 1, 10.0)
    assert [p.stations for p in reasonable_paths(g, 1, 3).paths] == [
        tuple(p) for p in expected_paths
    ]


def test_shortest_time_matrix_matches_reasonable(cross7):
    ids, times = shortest_time_matrix(cross7)
    pos = {sid: i for i, sid in enumerate(ids)}
    assert times[pos[1], pos[6]] == 12.0
    assert times[pos[1], pos[4]] == 6.0
    assert times[pos[1], pos[1]] == 0.0
