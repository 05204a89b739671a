"""Bundled toy networks and synthetic network/demand scaffolding.

CROSS7 is the canonical worked example used throughout the docs and tests:
two lines crossing at a single transfer station, seven stations total.

    line A:  a1 --2-- a2 --2-- X --2-- a3
    line B:  b1 --3-- X --3-- b2 --3-- b3      (transfer at X: 5 min)
"""

from __future__ import annotations

import csv
from datetime import datetime
from pathlib import Path

import numpy as np

from .demand import ODMatrix, TimeBin
from .network import Edge, Station, StationGraph, TransferArc, new_graph

CROSS7_IDS = {"a1": 1, "a2": 2, "X": 3, "a3": 4, "b1": 5, "b2": 6, "b3": 7}


def cross7() -> StationGraph:
    stations = [
        Station(1, "a1", frozenset({"A"}), False),
        Station(2, "a2", frozenset({"A"}), False),
        Station(3, "X", frozenset({"A", "B"}), True),
        Station(4, "a3", frozenset({"A"}), False),
        Station(5, "b1", frozenset({"B"}), False),
        Station(6, "b2", frozenset({"B"}), False),
        Station(7, "b3", frozenset({"B"}), False),
    ]
    edges = [
        Edge(1, 2, "A", 2.0),
        Edge(2, 3, "A", 2.0),
        Edge(3, 4, "A", 2.0),
        Edge(5, 3, "B", 3.0),
        Edge(3, 6, "B", 3.0),
        Edge(6, 7, "B", 3.0),
    ]
    arcs = [TransferArc(3, "A", "B", 5.0)]
    return new_graph(stations, edges, arcs)


def diamond(times=(2.0, 2.0, 2.0, 2.0)) -> StationGraph:
    """Two parallel two-leg routes between shared endpoints.

    ``times`` are the leg run times (upper two, then lower two); with all four
    equal the two routes tie exactly.
    """
    stations = [
        Station(1, "o", frozenset({"P", "Q"}), True),
        Station(2, "m1", frozenset({"P"}), False),
        Station(3, "m2", frozenset({"Q"}), False),
        Station(4, "d", frozenset({"P", "Q"}), True),
    ]
    edges = [
        Edge(1, 2, "P", times[0]),
        Edge(2, 4, "P", times[1]),
        Edge(1, 3, "Q", times[2]),
        Edge(3, 4, "Q", times[3]),
    ]
    return new_graph(stations, edges)


def grid_network(rows: int, cols: int, vcols, seed: int = 0) -> StationGraph:
    """Synthetic city grid: one horizontal line per row plus vertical lines at
    the given columns; stations where lines cross are transfers.

    Run times are random multiples of 0.25 min in [2, 5]; each transfer
    station gets a single walking time in [3, 7] shared by all its line pairs.
    Dyadic values keep every path-time sum exact in floating point.
    """
    rng = np.random.default_rng(seed)
    vcols = tuple(sorted(vcols))

    def sid(r: int, c: int) -> int:
        return r * cols + c + 1

    stations = []
    for r in range(rows):
        for c in range(cols):
            lines = {f"H{r}"}
            if c in vcols:
                lines.add(f"V{c}")
            stations.append(Station(sid(r, c), f"s{r}_{c}", frozenset(lines), len(lines) >= 2))

    def run_time() -> float:
        return float(rng.integers(8, 21)) / 4.0

    edges = []
    for r in range(rows):
        for c in range(cols - 1):
            edges.append(Edge(sid(r, c), sid(r, c + 1), f"H{r}", run_time()))
    for c in vcols:
        for r in range(rows - 1):
            edges.append(Edge(sid(r, c), sid(r + 1, c), f"V{c}", run_time()))

    arcs = []
    for r in range(rows):
        for c in vcols:
            walk = float(rng.integers(12, 29)) / 4.0
            arcs.append(TransferArc(sid(r, c), f"H{r}", f"V{c}", walk))
    return new_graph(stations, edges, arcs)


def service_bin(hour: int = 5, duration_min: float = 180.0) -> TimeBin:
    return TimeBin(datetime(2024, 1, 8, hour, 0), duration_min)


def single_od(g: StationGraph, origin: int, destination: int, flow: float,
              time_bin: TimeBin | None = None) -> ODMatrix:
    return ODMatrix.from_flows(time_bin or service_bin(), {(origin, destination): flow})


def uniform_od(g: StationGraph, flow: float = 1.0, time_bin: TimeBin | None = None) -> ODMatrix:
    flows = {
        (o, d): flow
        for o in g.station_ids
        for d in g.station_ids
        if o != d
    }
    return ODMatrix.from_flows(time_bin or service_bin(), flows)


def write_network_csvs(g: StationGraph, directory) -> tuple[Path, Path, Path]:
    """Write the graph in the loader's CSV formats; returns the three paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stations_path = directory / "stations.csv"
    edges_path = directory / "edges.csv"
    transfers_path = directory / "transfers.csv"

    with open(stations_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "name", "lines", "is_transfer"])
        for s in sorted(g.stations, key=lambda s: s.id):
            writer.writerow([s.id, s.name, "|".join(sorted(s.lines)), str(s.is_transfer).lower()])

    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from_id", "to_id", "line", "run_time_min"])
        for e in sorted(g.edges, key=lambda e: (e.pair(), e.line)):
            writer.writerow([e.a, e.b, e.line, repr(e.run_time)])

    with open(transfers_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["station_id", "from_line", "to_line", "transfer_time_min"])
        for t in sorted(g.transfer_arcs, key=lambda t: (t.station, t.from_line, t.to_line)):
            writer.writerow([t.station, t.from_line, t.to_line, repr(t.transfer_time)])

    return stations_path, edges_path, transfers_path
