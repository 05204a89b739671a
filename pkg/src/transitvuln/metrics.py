"""Per-bin station metrics: flow-weighted degree, flow betweenness, demand
closeness, the accessibility importance index, and pure-topology baselines.

All demand-driven metrics are pure functions of (graph, path cache, OD matrix)
and are computed for every station at once from flat cache arrays; the scalar
accessors below just index into that result.

The importance index for station i in a bin combines three passenger groups
touched by a disturbance at i: those exiting at i, those entering at i, and
those whose reasonable paths pass through i. Each group's passenger count is
multiplied by its count of distinct counterpart stations, and the sum is
normalised by (total passengers x active stations). Pass-through passengers
are counted by full pair flow whenever any reasonable path of the pair crosses
the station, so no flow assignment is needed; a split-weighted variant is
available for sensitivity studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demand import ODMatrix, TimeBin
from .errors import UnknownStationError, ValidationError
from .network import StationGraph
from .routing import (
    PathCache,
    _dag_lists,
    _dag_station_paths,
    _exact_paths,
    _source_labels,
    expand,
    topo_variant,
)


@dataclass(frozen=True)
class StationMetrics:
    station: int
    bin: TimeBin
    weighted_degree: float
    flow_betweenness: float
    demand_closeness: float  # math.inf when the station originates no flow
    topo_degree: int
    topo_betweenness: float
    importance: float


@dataclass(frozen=True)
class BinMetricArrays:
    """All-station metric vectors for one bin, indexed by canonical station order."""

    station_ids: tuple[int, ...]
    weighted_degree: np.ndarray
    flow_betweenness: np.ndarray
    demand_closeness: np.ndarray
    importance: np.ndarray
    total: float
    active_stations: int


def dense_flows(g: StationGraph, od: ODMatrix) -> np.ndarray:
    idx = {sid: i for i, sid in enumerate(g.station_ids)}
    n = len(idx)
    out = np.zeros((n, n))
    for (o, d), f in od.flows.items():
        io = idx.get(o)
        jd = idx.get(d)
        if io is None or jd is None:
            raise UnknownStationError(f"flow references station {o if io is None else d} not in graph")
        out[io, jd] = f
    return out


def compute_bin_arrays(
    g: StationGraph, od: ODMatrix, cache: PathCache, *, split_weighted_pass: bool = False
) -> BinMetricArrays:
    if cache.graph_version != g.version:
        raise ValidationError(
            f"path cache was built for graph version {cache.graph_version}, got {g.version}"
        )
    ma = cache.metric_arrays()
    n = g.n_stations
    F = dense_flows(g, od)
    f = F[ma.pair_o, ma.pair_d]

    S = float(F.sum())
    positive = F > 0
    active = int((positive.any(axis=1) | positive.any(axis=0)).sum())

    s_in = F.sum(axis=1)  # passengers originating at each station
    n_in = positive.sum(axis=1)
    s_out = F.sum(axis=0)  # passengers exiting at each station
    n_out = positive.sum(axis=0)

    counts = np.diff(ma.int_ptr)
    f_rep = np.repeat(f, counts)
    pos_rep = f_rep > 0
    s_pass = np.zeros(n)
    if split_weighted_pass:
        np.add.at(s_pass, ma.int_station, f_rep * ma.int_weight)
    else:
        np.add.at(s_pass, ma.int_station, f_rep)

    st_pos = ma.int_station[pos_rep]
    o_pos = np.repeat(ma.pair_o, counts)[pos_rep]
    d_pos = np.repeat(ma.pair_d, counts)[pos_rep]
    endpoint_seen = np.zeros((n, n), dtype=bool)
    endpoint_seen[st_pos, o_pos] = True
    endpoint_seen[st_pos, d_pos] = True
    n_pass = endpoint_seen.sum(axis=1)

    if S > 0:
        zeta = (s_out * n_out + s_in * n_in + s_pass * n_pass) / (S * active)
    else:
        zeta = np.zeros(n)

    w_edge = np.zeros(len(ma.edge_a))
    np.add.at(w_edge, ma.leg_edge, ma.leg_weight * f[ma.leg_pair])
    degree = np.zeros(n)
    np.add.at(degree, ma.edge_a, w_edge)
    np.add.at(degree, ma.edge_b, w_edge)

    betweenness = np.zeros(n)
    np.add.at(betweenness, st_pos, ma.int_weight[pos_rep])

    closeness = np.full(n, math.inf)
    originating = s_in > 0
    closeness[originating] = (n - 1) / s_in[originating]

    return BinMetricArrays(
        station_ids=g.station_ids,
        weighted_degree=degree,
        flow_betweenness=betweenness,
        demand_closeness=closeness,
        importance=zeta,
        total=S,
        active_stations=active,
    )


def _station_index(g: StationGraph, station: int) -> int:
    if not g.has_station(station):
        raise UnknownStationError(f"unknown station id {station}")
    return g.station_ids.index(station)


def weighted_degree(g: StationGraph, od: ODMatrix, cache: PathCache, station: int) -> float:
    """Summed assigned link flow over the station's incident edges."""
    i = _station_index(g, station)
    return float(compute_bin_arrays(g, od, cache).weighted_degree[i])


def flow_betweenness(g: StationGraph, od: ODMatrix, cache: PathCache, station: int) -> float:
    """Sum over OD pairs of the fraction of the pair's flow crossing the station."""
    i = _station_index(g, station)
    return float(compute_bin_arrays(g, od, cache).flow_betweenness[i])


def demand_closeness(g: StationGraph, od: ODMatrix, cache: PathCache, station: int) -> float:
    """(N-1) over the station's originating flow; inf when it originates none."""
    i = _station_index(g, station)
    return float(compute_bin_arrays(g, od, cache).demand_closeness[i])


def importance(g: StationGraph, od: ODMatrix, cache: PathCache, station: int, *,
               split_weighted_pass: bool = False) -> float:
    """Accessibility importance index; 0 when the bin carries no demand."""
    i = _station_index(g, station)
    arrays = compute_bin_arrays(g, od, cache, split_weighted_pass=split_weighted_pass)
    return float(arrays.importance[i])


# ---------------------------------------------------------------------------
# Topology-only baselines
# ---------------------------------------------------------------------------


def topo_metrics(g: StationGraph) -> dict[int, tuple[int, float]]:
    """Unweighted station degree plus run-time-weighted shortest-path
    betweenness (transfer arcs included), normalised by (N-1)(N-2)."""
    n = g.n_stations
    degree = {sid: len(g.adjacency[sid]) for sid in g.station_ids}
    if n < 3:
        return {sid: (degree[sid], 0.0) for sid in g.station_ids}

    exp0 = topo_variant(expand(g))
    bet = np.zeros(n)
    for o_idx in range(n):
        labels = _source_labels(exp0, o_idx)
        dist_time = labels[0].tolist()
        dag = _dag_lists(exp0, labels)
        for d_idx in range(n):
            if d_idx == o_idx:
                continue
            nodes = exp0.station_nodes(d_idx)
            finite = [int(v) for v in nodes if dist_time[v] != math.inf]
            if not finite:
                continue
            best = min(dist_time[v] for v in finite)
            starts = [v for v in finite if dist_time[v] == best]
            seqs, complete = _dag_station_paths(dag, starts, o_idx, max_paths=256)
            if not seqs or not complete:
                seqs = [seq for seq, _ in _exact_paths(exp0, o_idx, d_idx, k=None)]
            sigma = len(seqs)
            for seq in seqs:
                for s in seq[1:-1]:
                    bet[s] += 1.0 / sigma
    bet /= (n - 1) * (n - 2)
    return {sid: (degree[sid], float(bet[i])) for i, sid in enumerate(g.station_ids)}


def compute_bin_metrics(
    g: StationGraph,
    od: ODMatrix,
    cache: PathCache,
    topo: dict[int, tuple[int, float]] | None = None,
) -> list[StationMetrics]:
    """One StationMetrics row per station for the bin, in canonical id order."""
    if topo is None:
        topo = topo_metrics(g)
    arrays = compute_bin_arrays(g, od, cache)
    rows = []
    for i, sid in enumerate(g.station_ids):
        t_deg, t_bet = topo[sid]
        rows.append(
            StationMetrics(
                station=sid,
                bin=od.bin,
                weighted_degree=float(arrays.weighted_degree[i]),
                flow_betweenness=float(arrays.flow_betweenness[i]),
                demand_closeness=float(arrays.demand_closeness[i]),
                topo_degree=t_deg,
                topo_betweenness=t_bet,
                importance=float(arrays.importance[i]),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Line-level aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineImportance:
    line: str
    mean_importance: float
    mean_flow_betweenness: float
    mean_closeness: float  # inf as soon as any member station is inf
    total_weighted_degree: float


def line_importance(metrics, g: StationGraph) -> dict[str, LineImportance]:
    """Aggregate one bin's station metrics per line; transfer stations count
    towards every line they belong to."""
    members: dict[str, list[StationMetrics]] = {line: [] for line in sorted(g.lines)}
    for m in metrics:
        for line in g.station_by_id[m.station].lines:
            members[line].append(m)
    out = {}
    for line, rows in members.items():
        if not rows:
            continue
        k = len(rows)
        closeness = (
            math.inf
            if any(math.isinf(r.demand_closeness) for r in rows)
            else sum(r.demand_closeness for r in rows) / k
        )
        out[line] = LineImportance(
            line=line,
            mean_importance=sum(r.importance for r in rows) / k,
            mean_flow_betweenness=sum(r.flow_betweenness for r in rows) / k,
            mean_closeness=closeness,
            total_weighted_degree=sum(r.weighted_degree for r in rows),
        )
    return out
