"""Station graph model: stations, per-line running edges, in-station transfer arcs.

The graph is undirected at the station level. A transfer arc is a virtual
weighted link between two lines inside one transfer station; it never connects
distinct stations. Graphs are immutable: removals return new values with a
fresh version number, so caches keyed by version are never silently stale.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    ParseError,
    UnknownLineError,
    UnknownStationError,
    ValidationError,
)

DEFAULT_TRANSFER_MIN = 5.0

_version_counter = itertools.count(1)


@dataclass(frozen=True)
class Station:
    id: int
    name: str
    lines: frozenset[str]
    is_transfer: bool


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    line: str
    run_time: float

    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class TransferArc:
    station: int
    from_line: str
    to_line: str
    transfer_time: float


@dataclass(frozen=True)
class StationGraph:
    stations: tuple[Station, ...]
    edges: tuple[Edge, ...]
    transfer_arcs: tuple[TransferArc, ...]
    version: int

    @cached_property
    def station_by_id(self) -> dict[int, Station]:
        return {s.id: s for s in self.stations}

    @cached_property
    def station_ids(self) -> tuple[int, ...]:
        """Station ids in canonical (sorted) order; index = dense array position."""
        return tuple(sorted(s.id for s in self.stations))

    @cached_property
    def lines(self) -> frozenset[str]:
        return frozenset(line for s in self.stations for line in s.lines)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        """Station-level neighbours; parallel edges on different lines collapse."""
        adj: dict[int, set[int]] = {s.id: set() for s in self.stations}
        for e in self.edges:
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
        return {k: frozenset(v) for k, v in adj.items()}

    @cached_property
    def transfer_times(self) -> dict[tuple[int, str, str], float]:
        return {(t.station, t.from_line, t.to_line): t.transfer_time for t in self.transfer_arcs}

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    def has_station(self, station_id: int) -> bool:
        return station_id in self.station_by_id

    def line_stations(self, line: str) -> tuple[int, ...]:
        if line not in self.lines:
            raise UnknownLineError(f"unknown line {line!r}")
        return tuple(s.id for s in self.stations if line in s.lines)

    def component_count(self) -> int:
        parent = {s.id: s.id for s in self.stations}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            ra, rb = find(e.a), find(e.b)
            if ra != rb:
                parent[ra] = rb
        return len({find(s.id) for s in self.stations})

    def is_connected(self) -> bool:
        return self.n_stations == 0 or self.component_count() == 1


def new_graph(
    stations,
    edges,
    transfer_arcs=(),
    *,
    default_transfer_min: float = DEFAULT_TRANSFER_MIN,
    require_connected: bool = True,
) -> StationGraph:
    """Validate the parts, fill in missing transfer arcs, and freeze a graph.

    Transfer arcs may be given for one direction only; the reverse direction is
    generated with the same weight unless supplied explicitly. Ordered line
    pairs with no row at all get ``default_transfer_min``.
    """
    stations = tuple(stations)
    edges = tuple(edges)

    seen_ids: set[int] = set()
    for s in stations:
        if s.id in seen_ids:
            raise ValidationError(f"duplicate station id {s.id}")
        seen_ids.add(s.id)
        if not s.lines:
            raise ValidationError(f"station {s.id} belongs to no line")
        if s.is_transfer != (len(s.lines) >= 2):
            raise ValidationError(
                f"station {s.id}: is_transfer={s.is_transfer} inconsistent with lines {sorted(s.lines)}"
            )

    by_id = {s.id: s for s in stations}
    seen_edges: set[tuple[int, int, str]] = set()
    for e in edges:
        if e.a == e.b:
            raise ValidationError(f"edge {e.a}-{e.b} is a self loop")
        for endpoint in (e.a, e.b):
            if endpoint not in by_id:
                raise ValidationError(f"edge references unknown station id {endpoint}")
            if e.line not in by_id[endpoint].lines:
                raise ValidationError(
                    f"edge {e.a}-{e.b} on line {e.line!r}: station {endpoint} does not carry that line"
                )
        if not e.run_time > 0:
            raise ValidationError(f"edge {e.a}-{e.b}: run time must be positive, got {e.run_time}")
        key = (*e.pair(), e.line)
        if key in seen_edges:
            raise ValidationError(f"duplicate edge {e.a}-{e.b} on line {e.line!r}")
        seen_edges.add(key)

    explicit: dict[tuple[int, str, str], float] = {}
    for t in transfer_arcs:
        st = by_id.get(t.station)
        if st is None:
            raise ValidationError(f"transfer row references unknown station id {t.station}")
        if t.from_line == t.to_line:
            raise ValidationError(f"transfer row at station {t.station} connects {t.from_line!r} to itself")
        for line in (t.from_line, t.to_line):
            if line not in st.lines:
                raise ValidationError(
                    f"transfer row at station {t.station}: station does not carry line {line!r}"
                )
        if not t.transfer_time > 0:
            raise ValidationError(
                f"transfer row at station {t.station}: time must be positive, got {t.transfer_time}"
            )
        key = (t.station, t.from_line, t.to_line)
        if key in explicit:
            raise ValidationError(f"duplicate transfer row {key}")
        explicit[key] = t.transfer_time

    # Symmetric completion: one row covers both directions; any ordered pair
    # still missing after that falls back to the default walking time.
    arcs: list[TransferArc] = []
    for s in stations:
        if len(s.lines) < 2:
            continue
        for la, lb in itertools.permutations(sorted(s.lines), 2):
            time = explicit.get((s.id, la, lb))
            if time is None:
                time = explicit.get((s.id, lb, la))
            if time is None:
                time = default_transfer_min
            arcs.append(TransferArc(s.id, la, lb, time))

    g = StationGraph(stations, edges, tuple(arcs), next(_version_counter))
    if require_connected and stations and not g.is_connected():
        raise ValidationError(
            f"baseline graph is disconnected ({g.component_count()} components); "
            "pass allow_disconnected to override"
        )
    return g


def remove_stations(g: StationGraph, removed) -> StationGraph:
    """Return the graph with the given stations, their edges, and their arcs deleted."""
    removed = set(removed)
    for sid in removed:
        if not g.has_station(sid):
            raise UnknownStationError(f"unknown station id {sid}")
    stations = tuple(s for s in g.stations if s.id not in removed)
    edges = tuple(e for e in g.edges if e.a not in removed and e.b not in removed)
    arcs = tuple(t for t in g.transfer_arcs if t.station not in removed)
    return StationGraph(stations, edges, arcs, next(_version_counter))


def remove_line(g: StationGraph, line: str) -> StationGraph:
    """Delete every edge of a line; stations left with no line disappear.

    Transfer stations shared with surviving lines are kept (with the removed
    line struck from their line set) and stop being transfer stations when a
    single line remains.
    """
    if line not in g.lines:
        raise UnknownLineError(f"unknown line {line!r}")
    stations = []
    for s in g.stations:
        if line not in s.lines:
            stations.append(s)
            continue
        remaining = s.lines - {line}
        if not remaining:
            continue
        stations.append(Station(s.id, s.name, remaining, len(remaining) >= 2))
    survivors = {s.id for s in stations}
    edges = tuple(
        e for e in g.edges if e.line != line and e.a in survivors and e.b in survivors
    )
    arcs = tuple(
        t
        for t in g.transfer_arcs
        if t.station in survivors and line not in (t.from_line, t.to_line)
    )
    return StationGraph(tuple(stations), edges, arcs, next(_version_counter))


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

_STATION_COLUMNS = ["id", "name", "lines", "is_transfer"]
_EDGE_COLUMNS = ["from_id", "to_id", "line", "run_time_min"]
_TRANSFER_COLUMNS = ["station_id", "from_line", "to_line", "transfer_time_min"]


def _read_rows(path, expected_columns):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc}", path=path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty, header row required", path=path) from None
        if [h.strip() for h in header] != expected_columns:
            raise ParseError(
                f"expected header {','.join(expected_columns)}, got {','.join(header)}",
                path=path,
                line=1,
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_columns):
                raise ParseError(
                    f"expected {len(expected_columns)} columns, got {len(row)}",
                    path=path,
                    line=lineno,
                )
            rows.append((lineno, [cell.strip() for cell in row]))
        return rows


def _parse_int(value, path, line, what):
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"bad {what} {value!r}", path=path, line=line) from None


def _parse_float(value, path, line, what):
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"bad {what} {value!r}", path=path, line=line) from None


def _parse_bool(value, path, line, what):
    lowered = value.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ParseError(f"bad {what} {value!r}", path=path, line=line)


def load_network(
    stations_file,
    edges_file,
    transfers_file=None,
    *,
    default_transfer_min: float = DEFAULT_TRANSFER_MIN,
    allow_disconnected: bool = False,
) -> StationGraph:
    """Load and validate a station graph from the three CSV inputs.

    ``transfers_file`` may be omitted; every transfer then uses the default
    walking time.
    """
    stations = []
    for lineno, row in _read_rows(stations_file, _STATION_COLUMNS):
        sid = _parse_int(row[0], stations_file, lineno, "station id")
        lines = frozenset(part.strip() for part in row[2].split("|") if part.strip())
        is_transfer = _parse_bool(row[3], stations_file, lineno, "is_transfer flag")
        stations.append(Station(sid, row[1], lines, is_transfer))

    edges = []
    for lineno, row in _read_rows(edges_file, _EDGE_COLUMNS):
        a = _parse_int(row[0], edges_file, lineno, "station id")
        b = _parse_int(row[1], edges_file, lineno, "station id")
        run = _parse_float(row[3], edges_file, lineno, "run time")
        edges.append(Edge(a, b, row[2], run))

    arcs = []
    if transfers_file is not None:
        for lineno, row in _read_rows(transfers_file, _TRANSFER_COLUMNS):
            sid = _parse_int(row[0], transfers_file, lineno, "station id")
            time = _parse_float(row[3], transfers_file, lineno, "transfer time")
            arcs.append(TransferArc(sid, row[1], row[2], time))

    return new_graph(
        stations,
        edges,
        arcs,
        default_transfer_min=default_transfer_min,
        require_connected=not allow_disconnected,
    )
