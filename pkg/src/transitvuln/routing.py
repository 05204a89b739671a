"""Reasonable-path search and the all-pairs path cache.

Every station is expanded into one search node per (station, line) incidence;
in-station transfers become ordinary weighted arcs between those nodes, so a
single Dijkstra sweep prices rides and transfers together. Candidate paths are
ranked by the lexicographic key (total time, transfer count, transfer time)
and must be loopless at the station level. The reasonable set of an OD pair is
every candidate tying the minimal key; flow is split across the set according
to the configured rule.

Two search strategies cooperate:

* a per-source Dijkstra plus predecessor-DAG reconstruction (kernel-backed,
  used for the all-pairs cache and for bulk travel times), and
* an exact best-first enumeration over loopless paths (plain Python), which
  both implements the public k-shortest query and serves as the fallback for
  the rare pairs where every optimal walk revisits a station.
"""

from __future__ import annotations

import dataclasses
import gzip
import hashlib
import heapq
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ParseError, UnknownStationError, UnreachableError, ValidationError
from .network import StationGraph

SPLIT_RULES = ("inverse", "proportional-direct")

DEFAULT_K = 8
_FALLBACK_BUDGET = 4096
_MAX_TIED_PATHS = 512


@dataclass(frozen=True)
class Path:
    """A station-loopless route with its time decomposition."""

    stations: tuple[int, ...]
    ride_time: float
    transfer_count: int
    transfer_time: float

    @property
    def total_time(self) -> float:
        return self.ride_time + self.transfer_time

    def key(self) -> tuple[float, int, float]:
        return (self.total_time, self.transfer_count, self.transfer_time)


@dataclass(frozen=True)
class ReasonablePathSet:
    origin: int
    destination: int
    paths: tuple[Path, ...]
    split_weights: tuple[float, ...]

    @property
    def total_time(self) -> float:
        return self.paths[0].total_time


# ---------------------------------------------------------------------------
# Line-expanded graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpandedGraph:
    station_ids: tuple[int, ...]
    id_to_idx: dict
    exp_station: np.ndarray
    exp_line: tuple[str, ...]
    indptr: np.ndarray
    nbr: np.ndarray
    w_time: np.ndarray
    w_tc: np.ndarray
    w_tt: np.ndarray
    st_ptr: np.ndarray
    st_exp: np.ndarray

    @property
    def n_stations(self) -> int:
        return len(self.station_ids)

    @property
    def n_exp(self) -> int:
        return len(self.exp_station)

    def station_nodes(self, station_idx: int) -> np.ndarray:
        return self.st_exp[self.st_ptr[station_idx] : self.st_ptr[station_idx + 1]]

    @cached_property
    def reverse_adjacency(self):
        """Reversed CSR with time weights only; used for search lower bounds."""
        n = self.n_exp
        counts = np.zeros(n + 1, np.int64)
        targets = self.nbr
        for u in targets:
            counts[u + 1] += 1
        rptr = np.cumsum(counts).astype(np.int32)
        fill = rptr[:-1].copy()
        rnbr = np.empty(len(targets), np.int32)
        rw = np.empty(len(targets), np.float64)
        for v in range(n):
            for e in range(self.indptr[v], self.indptr[v + 1]):
                u = targets[e]
                slot = fill[u]
                rnbr[slot] = v
                rw[slot] = self.w_time[e]
                fill[u] += 1
        return rptr, rnbr, rw


def expand(g: StationGraph) -> ExpandedGraph:
    """Build the line-expanded search graph in CSR form."""
    station_ids = g.station_ids
    id_to_idx = {sid: i for i, sid in enumerate(station_ids)}

    exp_station: list[int] = []
    exp_line: list[str] = []
    st_ptr = [0]
    node_of: dict[tuple[int, str], int] = {}
    for idx, sid in enumerate(station_ids):
        for line in sorted(g.station_by_id[sid].lines):
            node_of[(idx, line)] = len(exp_station)
            exp_station.append(idx)
            exp_line.append(line)
        st_ptr.append(len(exp_station))
    n_exp = len(exp_station)

    arcs: list[tuple[int, int, float, int, float]] = []
    for e in g.edges:
        ia = node_of[(id_to_idx[e.a], e.line)]
        ib = node_of[(id_to_idx[e.b], e.line)]
        arcs.append((ia, ib, e.run_time, 0, 0.0))
        arcs.append((ib, ia, e.run_time, 0, 0.0))
    for t in g.transfer_arcs:
        sidx = id_to_idx[t.station]
        arcs.append(
            (
                node_of[(sidx, t.from_line)],
                node_of[(sidx, t.to_line)],
                t.transfer_time,
                1,
                t.transfer_time,
            )
        )

    counts = np.zeros(n_exp + 1, np.int64)
    for a in arcs:
        counts[a[0] + 1] += 1
    indptr = np.cumsum(counts).astype(np.int32)
    fill = indptr[:-1].copy()
    m = len(arcs)
    nbr = np.empty(m, np.int32)
    w_time = np.empty(m, np.float64)
    w_tc = np.empty(m, np.int32)
    w_tt = np.empty(m, np.float64)
    for src, dst, wt, wc, wx in arcs:
        slot = fill[src]
        nbr[slot] = dst
        w_time[slot] = wt
        w_tc[slot] = wc
        w_tt[slot] = wx
        fill[src] += 1

    return ExpandedGraph(
        station_ids=station_ids,
        id_to_idx=id_to_idx,
        exp_station=np.array(exp_station, np.int32),
        exp_line=tuple(exp_line),
        indptr=indptr,
        nbr=nbr,
        w_time=w_time,
        w_tc=w_tc,
        w_tt=w_tt,
        st_ptr=np.array(st_ptr, np.int32),
        st_exp=np.arange(n_exp, dtype=np.int32),
    )


def topo_variant(exp: ExpandedGraph) -> ExpandedGraph:
    """Same topology and times, but transfer count/time components zeroed.

    With the tie-break components gone, the predecessor DAG captures every
    time-minimal walk, which is what topological betweenness needs.
    """
    return dataclasses.replace(
        exp,
        w_tc=np.zeros_like(exp.w_tc),
        w_tt=np.zeros_like(exp.w_tt),
    )


# ---------------------------------------------------------------------------
# Kernel-backed per-source sweep
# ---------------------------------------------------------------------------


def _source_labels(exp: ExpandedGraph, origin_idx: int):
    sources = exp.station_nodes(origin_idx)
    return kernels.lex_dijkstra(
        exp.n_exp, exp.indptr, exp.nbr, exp.w_time, exp.w_tc, exp.w_tt, sources
    )


def _dest_summary(exp: ExpandedGraph, origin_idx: int, labels, budget=_FALLBACK_BUDGET):
    dist_time, dist_tc, dist_tt, pred_ptr, pred_flat = labels
    return kernels.first_loopless(
        exp.n_stations,
        origin_idx,
        exp.exp_station,
        exp.st_ptr,
        exp.st_exp,
        dist_time,
        dist_tc,
        dist_tt,
        pred_ptr,
        pred_flat,
        budget,
    )


def _dag_lists(exp, labels):
    """Plain-list views of the predecessor DAG; one conversion per origin keeps
    the per-destination walks free of numpy scalar overhead."""
    _, _, _, pred_ptr, pred_flat = labels
    return exp.exp_station.tolist(), pred_ptr.tolist(), pred_flat.tolist()


def _dag_station_paths(dag, start_nodes, origin_idx, max_paths, max_steps=200_000):
    """Enumerate station-loopless optimal walks ending at the given nodes.

    Returns (paths, complete): forward station-index tuples, and a flag that
    is False when a cap was hit (the caller must fall back to exact search).
    """
    es, pp, pf = dag

    results: set[tuple[int, ...]] = set()
    seq: list[int] = []
    visited: set[int] = set()
    state = {"steps": 0, "complete": True}

    def walk(node: int) -> bool:
        if es[node] == origin_idx:
            results.add(tuple(reversed(seq)))
            if len(results) > max_paths:
                state["complete"] = False
                return False
            return True
        for i in range(pp[node], pp[node + 1]):
            state["steps"] += 1
            if state["steps"] > max_steps:
                state["complete"] = False
                return False
            u = pf[i]
            su = es[u]
            if su == es[node]:
                if not walk(u):
                    return False
            elif su not in visited:
                visited.add(su)
                seq.append(su)
                ok = walk(u)
                seq.pop()
                visited.discard(su)
                if not ok:
                    return False
        return True

    for s0 in start_nodes:
        s0 = int(s0)
        visited = {es[s0]}
        seq = [es[s0]]
        if not walk(s0):
            break
    return sorted(results), state["complete"]


# ---------------------------------------------------------------------------
# Exact best-first loopless enumeration
# ---------------------------------------------------------------------------


def _reverse_time_bound(exp: ExpandedGraph, dest_idx: int) -> list[float]:
    """Admissible remaining-time bound: backward time-only Dijkstra from the
    destination's expanded nodes over the reversed graph (walks, so a valid
    lower bound for loopless paths)."""
    rptr, rnbr, rw = exp.reverse_adjacency
    dist = [math.inf] * exp.n_exp
    heap = []
    for v in exp.station_nodes(dest_idx):
        dist[int(v)] = 0.0
        heap.append((0.0, int(v)))
    heapq.heapify(heap)
    while heap:
        t, v = heapq.heappop(heap)
        if t > dist[v]:
            continue
        for e in range(rptr[v], rptr[v + 1]):
            u = int(rnbr[e])
            nt = t + rw[e]
            if nt < dist[u]:
                dist[u] = nt
                heapq.heappush(heap, (nt, u))
    return dist


def _exact_paths(exp: ExpandedGraph, o_idx: int, d_idx: int, *, k: int | None):
    """Best-first enumeration of loopless paths in lexicographic key order.

    With ``k`` set, returns the k best distinct station sequences (plus full
    tie groups resolved deterministically); with ``k=None`` returns every
    sequence tying the minimal key. Each result is (station-index tuple,
    (time, transfers, transfer_time)).
    """
    bound = _reverse_time_bound(exp, d_idx)
    es = exp.exp_station
    indptr = exp.indptr
    nbr = exp.nbr
    wt = exp.w_time
    wc = exp.w_tc
    wx = exp.w_tt

    counter = itertools.count()
    heap = []
    for v in exp.station_nodes(o_idx):
        v = int(v)
        if bound[v] == math.inf:
            continue
        heap.append((0.0, 0, 0.0, next(counter), v, (o_idx,), frozenset((o_idx,)), frozenset((v,))))
    heapq.heapify(heap)

    found: dict[tuple[int, ...], tuple[float, int, float]] = {}
    limit_key = None  # stop once popped keys exceed this
    prune_time = math.inf

    def note(seq, key):
        nonlocal limit_key, prune_time
        if seq in found:
            return
        found[seq] = key
        if len(found) > _MAX_TIED_PATHS:
            raise ValidationError(
                f"more than {_MAX_TIED_PATHS} tied optimal paths between "
                f"{exp.station_ids[o_idx]} and {exp.station_ids[d_idx]}"
            )
        if k is None:
            if limit_key is None:
                limit_key = key
                prune_time = key[0]
        elif len(found) >= k:
            kth = sorted(found.values())[k - 1]
            limit_key = kth
            prune_time = kth[0]

    while heap:
        t, c, x, _, node, seq, visited, chain = heapq.heappop(heap)
        if limit_key is not None and (t, c, x) > limit_key:
            break
        station = int(es[node])
        if station == d_idx:
            note(seq, (t, c, x))
            continue
        for e in range(indptr[node], indptr[node + 1]):
            u = int(nbr[e])
            su = int(es[u])
            nt = t + wt[e]
            if nt + bound[u] > prune_time + 1e-9:
                continue
            if su == station:
                if u in chain:
                    continue
                heapq.heappush(
                    heap,
                    (nt, c + int(wc[e]), x + wx[e], next(counter), u, seq, visited, chain | {u}),
                )
            elif su not in visited:
                heapq.heappush(
                    heap,
                    (
                        nt,
                        c + int(wc[e]),
                        x + wx[e],
                        next(counter),
                        u,
                        seq + (su,),
                        visited | {su},
                        frozenset((u,)),
                    ),
                )

    ordered = sorted(found.items(), key=lambda item: (item[1], item[0]))
    if k is None:
        if not ordered:
            return []
        best = ordered[0][1]
        return [(seq, key) for seq, key in ordered if key == best]
    return ordered[:k]


# ---------------------------------------------------------------------------
# Public queries
# ---------------------------------------------------------------------------


def _check_pair(g: StationGraph, origin: int, destination: int) -> tuple[int, int]:
    for sid in (origin, destination):
        if not g.has_station(sid):
            raise UnknownStationError(f"unknown station id {sid}")
    if origin == destination:
        raise ValidationError("origin and destination must differ")
    return g.station_ids.index(origin), g.station_ids.index(destination)


def _make_path(exp: ExpandedGraph, seq: tuple[int, ...], key) -> Path:
    t, c, x = float(key[0]), int(key[1]), float(key[2])
    stations = tuple(exp.station_ids[i] for i in seq)
    return Path(stations=stations, ride_time=t - x, transfer_count=c, transfer_time=x)


def k_shortest_paths(g: StationGraph, origin: int, destination: int, k: int) -> list[Path]:
    """Up to k loopless paths sorted by (total time, transfers, transfer time),
    ties broken by station sequence. Empty list when unreachable."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    o_idx, d_idx = _check_pair(g, origin, destination)
    exp = expand(g)
    results = _exact_paths(exp, o_idx, d_idx, k=k)
    return [_make_path(exp, seq, key) for seq, key in results]


def split_weights(total_times, rule: str = "inverse") -> tuple[float, ...]:
    """Flow shares for a reasonable set; equal-time paths always split evenly."""
    if rule not in SPLIT_RULES:
        raise ValidationError(f"unknown split rule {rule!r}; expected one of {SPLIT_RULES}")
    if rule == "inverse":
        raw = [1.0 / float(t) for t in total_times]
    else:
        raw = [float(t) for t in total_times]
    total = sum(raw)
    return tuple(w / total for w in raw)


def reasonable_paths(
    g: StationGraph,
    origin: int,
    destination: int,
    k: int = DEFAULT_K,
    *,
    eps_time: float = 0.0,
    split_rule: str = "inverse",
) -> ReasonablePathSet:
    """Filter the k-shortest candidates down to the lexicographic minimum.

    With the default ``eps_time=0`` the set is every candidate whose key ties
    the best exactly; a positive tolerance first widens the time filter, then
    keeps the candidates minimal in transfer count and transfer time.
    """
    candidates = k_shortest_paths(g, origin, destination, k)
    if not candidates:
        raise UnreachableError(f"no path between {origin} and {destination}")
    min_time = candidates[0].total_time
    kept = [p for p in candidates if p.total_time <= min_time + eps_time]
    min_tc = min(p.transfer_count for p in kept)
    kept = [p for p in kept if p.transfer_count == min_tc]
    min_tt = min(p.transfer_time for p in kept)
    kept = [p for p in kept if p.transfer_time == min_tt]
    weights = split_weights([p.total_time for p in kept], split_rule)
    return ReasonablePathSet(origin, destination, tuple(kept), weights)


# ---------------------------------------------------------------------------
# All-pairs cache
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CacheEntry:
    paths: tuple[tuple[int, ...], ...]
    weights: tuple[float, ...]
    total_time: float
    transfer_count: int
    transfer_time: float
    interior_weight: dict  # interior station id -> summed split weight

    @property
    def interior(self) -> frozenset:
        return frozenset(self.interior_weight)


def _entry_from_paths(seqs, key, station_ids, split_rule) -> CacheEntry:
    t, c, x = float(key[0]), int(key[1]), float(key[2])
    paths = tuple(tuple(station_ids[i] for i in seq) for seq in seqs)
    weights = split_weights([t] * len(paths), split_rule)
    interior: dict[int, float] = {}
    for path, w in zip(paths, weights):
        for sid in path[1:-1]:
            interior[sid] = interior.get(sid, 0.0) + w
    return CacheEntry(paths, weights, t, int(c), x, interior)


def _cache_rows_for_origin(exp, o_idx, k, split_rule, max_paths):
    """All reachable destinations for one origin: (d_idx, CacheEntry)."""
    labels = _source_labels(exp, o_idx)
    dist_time = labels[0].tolist()
    dist_tc = labels[1].tolist()
    dist_tt = labels[2].tolist()
    dag = _dag_lists(exp, labels)
    rows = []
    for d_idx in range(exp.n_stations):
        if d_idx == o_idx:
            continue
        nodes = exp.station_nodes(d_idx)
        finite = [int(v) for v in nodes if dist_time[v] != math.inf]
        if not finite:
            continue
        best = min((dist_time[v], dist_tc[v], dist_tt[v]) for v in finite)
        starts = [
            v
            for v in finite
            if (dist_time[v], dist_tc[v], dist_tt[v]) == best
        ]
        seqs, complete = _dag_station_paths(dag, starts, o_idx, max_paths)
        if seqs and complete:
            entry = _entry_from_paths(seqs[:k], best, exp.station_ids, split_rule)
        else:
            # Every optimal walk loops through a station (or caps were hit):
            # fall back to the exact loopless search for this pair.
            results = _exact_paths(exp, o_idx, d_idx, k=None)
            if not results:
                continue
            key = results[0][1]
            entry = _entry_from_paths([seq for seq, _ in results[:k]], key, exp.station_ids, split_rule)
        rows.append((d_idx, entry))
    return rows


class PathCache:
    """All-pairs reasonable path sets plus the pass-through index."""

    def __init__(self, graph: StationGraph, k: int, split_rule: str, eps_time: float, entries):
        self.graph = graph
        self.graph_version = graph.version
        self.k = k
        self.split_rule = split_rule
        self.eps_time = eps_time
        self.entries: dict[tuple[int, int], CacheEntry] = entries
        pass_index: dict[int, list[tuple[int, int, float]]] = {sid: [] for sid in graph.station_ids}
        for (o, d), entry in sorted(entries.items()):
            for sid, w in sorted(entry.interior_weight.items()):
                pass_index[sid].append((o, d, w))
        self._pass_index = {sid: tuple(rows) for sid, rows in pass_index.items()}
        self._metric_arrays = None

    def entry(self, origin: int, destination: int) -> CacheEntry | None:
        for sid in (origin, destination):
            if not self.graph.has_station(sid):
                raise UnknownStationError(f"unknown station id {sid}")
        return self.entries.get((origin, destination))

    def reasonable_set(self, origin: int, destination: int) -> ReasonablePathSet:
        entry = self.entry(origin, destination)
        if entry is None:
            raise UnreachableError(f"no path between {origin} and {destination}")
        paths = tuple(
            Path(
                stations=p,
                ride_time=entry.total_time - entry.transfer_time,
                transfer_count=entry.transfer_count,
                transfer_time=entry.transfer_time,
            )
            for p in entry.paths
        )
        return ReasonablePathSet(origin, destination, paths, entry.weights)

    def pairs_through(self, station_id: int) -> tuple[tuple[int, int, float], ...]:
        """OD pairs with this station interior on some reasonable path, with
        the summed split weight of those paths."""
        if not self.graph.has_station(station_id):
            raise UnknownStationError(f"unknown station id {station_id}")
        return self._pass_index[station_id]

    def metric_arrays(self):
        if self._metric_arrays is None:
            self._metric_arrays = _build_metric_arrays(self)
        return self._metric_arrays


@dataclass(frozen=True)
class MetricArrays:
    """Flat array view of the cache for vectorised per-bin metrics."""

    pair_keys: tuple  # ordered (origin id, destination id)
    pair_o: np.ndarray  # station indices
    pair_d: np.ndarray
    pair_time: np.ndarray
    int_ptr: np.ndarray  # CSR over pairs: interior stations + split weights
    int_station: np.ndarray
    int_weight: np.ndarray
    leg_pair: np.ndarray  # flattened path legs for link-flow assignment
    leg_edge: np.ndarray
    leg_weight: np.ndarray
    edge_a: np.ndarray  # unordered station-level edges
    edge_b: np.ndarray


def _build_metric_arrays(cache: PathCache) -> MetricArrays:
    g = cache.graph
    idx = {sid: i for i, sid in enumerate(g.station_ids)}

    edge_id: dict[tuple[int, int], int] = {}
    for e in g.edges:
        a, b = idx[e.a], idx[e.b]
        pair = (a, b) if a < b else (b, a)
        if pair not in edge_id:
            edge_id[pair] = len(edge_id)
    edge_a = np.array([p[0] for p in edge_id], np.int32)
    edge_b = np.array([p[1] for p in edge_id], np.int32)

    pair_keys = tuple(sorted(cache.entries))
    pair_o = np.array([idx[o] for o, _ in pair_keys], np.int32)
    pair_d = np.array([idx[d] for _, d in pair_keys], np.int32)
    pair_time = np.array([cache.entries[key].total_time for key in pair_keys], np.float64)

    int_ptr = [0]
    int_station: list[int] = []
    int_weight: list[float] = []
    leg_pair: list[int] = []
    leg_edge: list[int] = []
    leg_weight: list[float] = []
    for p, key in enumerate(pair_keys):
        entry = cache.entries[key]
        for sid, w in sorted(entry.interior_weight.items()):
            int_station.append(idx[sid])
            int_weight.append(w)
        int_ptr.append(len(int_station))
        for path, w in zip(entry.paths, entry.weights):
            for a, b in zip(path, path[1:]):
                ia, ib = idx[a], idx[b]
                pair = (ia, ib) if ia < ib else (ib, ia)
                leg_pair.append(p)
                leg_edge.append(edge_id[pair])
                leg_weight.append(w)

    return MetricArrays(
        pair_keys=pair_keys,
        pair_o=pair_o,
        pair_d=pair_d,
        pair_time=pair_time,
        int_ptr=np.array(int_ptr, np.int64),
        int_station=np.array(int_station, np.int32),
        int_weight=np.array(int_weight, np.float64),
        leg_pair=np.array(leg_pair, np.int64),
        leg_edge=np.array(leg_edge, np.int64),
        leg_weight=np.array(leg_weight, np.float64),
        edge_a=edge_a,
        edge_b=edge_b,
    )


def build_path_cache(
    g: StationGraph,
    k: int = DEFAULT_K,
    *,
    split_rule: str = "inverse",
    eps_time: float = 0.0,
    workers: int = 1,
) -> PathCache:
    """Precompute reasonable path sets for every ordered station pair."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if split_rule not in SPLIT_RULES:
        raise ValidationError(f"unknown split rule {split_rule!r}")
    exp = expand(g)
    entries: dict[tuple[int, int], CacheEntry] = {}

    if eps_time > 0.0:
        # Tolerance widening needs candidate paths beyond the optimum; go
        # through the exact per-pair query (slow path, small graphs).
        for o in g.station_ids:
            for d in g.station_ids:
                if o == d:
                    continue
                try:
                    rps = reasonable_paths(g, o, d, k, eps_time=eps_time, split_rule=split_rule)
                except UnreachableError:
                    continue
                interior: dict[int, float] = {}
                for path, w in zip(rps.paths, rps.split_weights):
                    for sid in path.stations[1:-1]:
                        interior[sid] = interior.get(sid, 0.0) + w
                first = rps.paths[0]
                entries[(o, d)] = CacheEntry(
                    tuple(p.stations for p in rps.paths),
                    rps.split_weights,
                    first.total_time,
                    first.transfer_count,
                    first.transfer_time,
                    interior,
                )
        return PathCache(g, k, split_rule, eps_time, entries)

    max_paths = max(64, 8 * k)

    def run(o_idx: int):
        return o_idx, _cache_rows_for_origin(exp, o_idx, k, split_rule, max_paths)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            all_rows = list(pool.map(run, range(exp.n_stations)))
    else:
        all_rows = [run(o_idx) for o_idx in range(exp.n_stations)]

    for o_idx, rows in all_rows:
        o_id = exp.station_ids[o_idx]
        for d_idx, entry in rows:
            entries[(o_id, exp.station_ids[d_idx])] = entry
    return PathCache(g, k, split_rule, eps_time, entries)


# ---------------------------------------------------------------------------
# Bulk travel times
# ---------------------------------------------------------------------------


def loopless_times_from(exp: ExpandedGraph, origin_idx: int) -> np.ndarray:
    """Reasonable-path total time from one origin to every station (inf when
    unreachable); resolves undecided destinations with the exact search."""
    labels = _source_labels(exp, origin_idx)
    d_time, _, _, status = _dest_summary(exp, origin_idx, labels)
    times = d_time.copy()
    for d_idx in np.nonzero(status == 2)[0]:
        results = _exact_paths(exp, origin_idx, int(d_idx), k=None)
        times[d_idx] = results[0][1][0] if results else math.inf
    return times


def shortest_time_matrix(g: StationGraph, workers: int = 1):
    """(station ids, dense matrix of reasonable-path total times)."""
    exp = expand(g)
    n = exp.n_stations
    out = np.full((n, n), math.inf)

    def run(o_idx: int):
        return o_idx, loopless_times_from(exp, o_idx)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(n)))
    else:
        rows = [run(o) for o in range(n)]
    for o_idx, times in rows:
        out[o_idx] = times
        out[o_idx, o_idx] = 0.0
    return exp.station_ids, out


# ---------------------------------------------------------------------------
# Cache export / import
# ---------------------------------------------------------------------------


def graph_fingerprint(g: StationGraph) -> str:
    """Content hash of the graph, stable across processes (unlike version)."""
    payload = {
        "stations": [
            [s.id, s.name, sorted(s.lines), s.is_transfer] for s in sorted(g.stations, key=lambda s: s.id)
        ],
        "edges": sorted([min(e.a, e.b), max(e.a, e.b), e.line, e.run_time] for e in g.edges),
        "transfers": sorted(
            [t.station, t.from_line, t.to_line, t.transfer_time] for t in g.transfer_arcs
        ),
    }
    blob = json.dumps(payload, separators=(",", ":"), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def save_cache(cache: PathCache, path) -> None:
    doc = {
        "fingerprint": graph_fingerprint(cache.graph),
        "k": cache.k,
        "split_rule": cache.split_rule,
        "eps_time": cache.eps_time,
        "pairs": {
            f"{o},{d}": {
                "paths": [list(p) for p in entry.paths],
                "weights": list(entry.weights),
                "time": entry.total_time,
                "transfers": entry.transfer_count,
                "transfer_time": entry.transfer_time,
            }
            for (o, d), entry in sorted(cache.entries.items())
        },
    }
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_cache(path, g: StationGraph) -> PathCache:
    opener = gzip.open if str(path).endswith(".gz") else open
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, gzip.BadGzipFile, EOFError, UnicodeDecodeError) as exc:
        raise ParseError(f"corrupt cache file: {exc}", path=path) from exc
    except OSError as exc:
        raise ParseError(f"cannot open cache: {exc}", path=path) from exc
    if doc.get("fingerprint") != graph_fingerprint(g):
        raise ValidationError("cache was built for a different graph")
    try:
        entries: dict[tuple[int, int], CacheEntry] = {}
        for key, rec in doc["pairs"].items():
            o, d = (int(part) for part in key.split(","))
            paths = tuple(tuple(p) for p in rec["paths"])
            weights = tuple(rec["weights"])
            interior: dict[int, float] = {}
            for p, w in zip(paths, weights):
                for sid in p[1:-1]:
                    interior[sid] = interior.get(sid, 0.0) + w
            entries[(o, d)] = CacheEntry(
                paths, weights, rec["time"], rec["transfers"], rec["transfer_time"], interior
            )
        return PathCache(g, doc["k"], doc["split_rule"], doc["eps_time"], entries)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed cache document: {exc}", path=path) from exc
