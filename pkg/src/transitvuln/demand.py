"""Trip records, time bins, per-bin OD matrices, and synthetic demand.

Records are binned by entry time: the per-bin totals describe passengers who
entered the system during that bin, which is the only unambiguous single key
for a record spanning two bins.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InvalidProfileError,
    ParseError,
    RecordOutOfRangeError,
    ValidationError,
)
from .network import StationGraph

DEFAULT_SERVICE_DATE = date(2024, 1, 8)
DEFAULT_FIRST_BIN = time(5, 0)
DEFAULT_BIN_MINUTES = 180.0
DEFAULT_BIN_COUNT = 6

DEMAND_RULES = ("uniform", "gravity-by-path-time", "peaked-commuter")


@dataclass(frozen=True)
class TripRecord:
    entry_time: datetime
    exit_time: datetime
    origin: int
    destination: int


@dataclass(frozen=True)
class TimeBin:
    start: datetime
    duration_min: float

    @property
    def end(self) -> datetime:
        return self.start + timedelta(minutes=self.duration_min)

    def contains(self, when: datetime) -> bool:
        return self.start <= when < self.end

    def label(self) -> str:
        return self.start.isoformat()


@dataclass(frozen=True)
class ODMatrix:
    """Origin-destination flow counts for one time bin.

    ``total`` is the number of passengers entering during the bin; the active
    station count is the number of distinct stations appearing as origin or
    destination of some positive flow.
    """

    bin: TimeBin
    flows: Mapping[tuple[int, int], float]
    total: float
    active_stations: int

    @classmethod
    def from_flows(cls, time_bin: TimeBin, flows: Mapping[tuple[int, int], float]) -> "ODMatrix":
        clean: dict[tuple[int, int], float] = {}
        active: set[int] = set()
        total = 0.0
        for (o, d), f in flows.items():
            if o == d:
                raise ValidationError(f"diagonal flow entry {o}->{d}")
            if f < 0:
                raise ValidationError(f"negative flow {f} for pair {o}->{d}")
            if f == 0:
                continue
            clean[(o, d)] = float(f)
            total += float(f)
            active.add(o)
            active.add(d)
        return cls(time_bin, clean, total, len(active))


def default_bins(
    service_date: date = DEFAULT_SERVICE_DATE,
    first: time = DEFAULT_FIRST_BIN,
    duration_min: float = DEFAULT_BIN_MINUTES,
    count: int = DEFAULT_BIN_COUNT,
) -> tuple[TimeBin, ...]:
    """Contiguous bins tiling the service day (default 05:00-23:00 in 3 h steps)."""
    start = datetime.combine(service_date, first)
    return tuple(
        TimeBin(start + timedelta(minutes=i * duration_min), duration_min) for i in range(count)
    )


def _check_tiling(bins: Sequence[TimeBin]) -> None:
    if not bins:
        raise ValidationError("at least one time bin is required")
    for b in bins:
        if not b.duration_min > 0:
            raise ValidationError(f"bin at {b.start} has non-positive duration")
    for prev, nxt in zip(bins, bins[1:]):
        if prev.end != nxt.start:
            raise ValidationError(
                f"bins do not tile: {prev.start}+{prev.duration_min}min != {nxt.start}"
            )


def bin_trips(
    records: Iterable[TripRecord],
    bins: Sequence[TimeBin],
    *,
    strict: bool = False,
) -> tuple[list[ODMatrix], int]:
    """Aggregate records into one OD matrix per bin, keyed by entry time.

    Returns the matrices and the count of records whose entry time falls
    outside every bin. Out-of-range records are dropped unless ``strict``.
    """
    bins = list(bins)
    _check_tiling(bins)
    day_start = bins[0].start
    day_end = bins[-1].end
    starts = [b.start for b in bins]

    counts: list[dict[tuple[int, int], float]] = [dict() for _ in bins]
    out_of_range = 0
    for rec in records:
        if not (day_start <= rec.entry_time < day_end):
            if strict:
                raise RecordOutOfRangeError(
                    f"record entering at {rec.entry_time} is outside all bins"
                )
            out_of_range += 1
            continue
        lo, hi = 0, len(starts) - 1
        while lo < hi:  # rightmost bin starting at or before the entry time
            mid = (lo + hi + 1) // 2
            if starts[mid] <= rec.entry_time:
                lo = mid
            else:
                hi = mid - 1
        key = (rec.origin, rec.destination)
        slot = counts[lo]
        slot[key] = slot.get(key, 0.0) + 1.0

    return [ODMatrix.from_flows(b, c) for b, c in zip(bins, counts)], out_of_range


# ---------------------------------------------------------------------------
# AFC ingestion
# ---------------------------------------------------------------------------

_AFC_COLUMNS = ["entry_time", "exit_time", "origin_id", "destination_id"]


@dataclass(frozen=True)
class IngestReport:
    read: int
    kept: int
    dropped_same_od: int
    dropped_bad_times: int


def load_trips(path) -> tuple[list[TripRecord], IngestReport]:
    """Read an AFC CSV; rows violating record invariants are dropped and counted."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc}", path=path) from exc
    records: list[TripRecord] = []
    read = same_od = bad_times = 0
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty, header row required", path=path) from None
        if [h.strip() for h in header] != _AFC_COLUMNS:
            raise ParseError(
                f"expected header {','.join(_AFC_COLUMNS)}, got {','.join(header)}",
                path=path,
                line=1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 columns, got {len(row)}", path=path, line=lineno)
            read += 1
            try:
                entry = datetime.fromisoformat(row[0].strip())
                exit_ = datetime.fromisoformat(row[1].strip())
            except ValueError:
                raise ParseError(f"bad timestamp in {row[:2]}", path=path, line=lineno) from None
            try:
                origin = int(row[2])
                dest = int(row[3])
            except ValueError:
                raise ParseError(f"bad station id in {row[2:]}", path=path, line=lineno) from None
            if origin == dest:
                same_od += 1
                continue
            if not entry < exit_:
                bad_times += 1
                continue
            records.append(TripRecord(entry, exit_, origin, dest))
    return records, IngestReport(read, len(records), same_od, bad_times)


def write_trips(records: Iterable[TripRecord], path) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_AFC_COLUMNS)
        n = 0
        for rec in records:
            writer.writerow(
                [rec.entry_time.isoformat(), rec.exit_time.isoformat(), rec.origin, rec.destination]
            )
            n += 1
    return n


# ---------------------------------------------------------------------------
# Synthetic demand
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DemandProfile:
    """Per-bin trip totals plus an OD weighting rule.

    Rules:
      uniform               every ordered pair equally likely
      gravity-by-path-time  weight proportional to 1/travel_time**alpha
      peaked-commuter       uniform base; inbound bins overweight trips into
                            the centre stations, outbound bins trips out
    """

    bins: tuple[TimeBin, ...]
    totals: tuple[int, ...]
    rule: str = "uniform"
    alpha: float = 2.0
    peak_factor: float = 4.0
    centers: tuple[int, ...] | None = None
    inbound_bins: tuple[int, ...] = (0, 1)
    outbound_bins: tuple[int, ...] = (4, 5)

    def validate(self) -> None:
        _check_tiling(self.bins)
        if len(self.totals) != len(self.bins):
            raise InvalidProfileError(
                f"profile has {len(self.bins)} bins but {len(self.totals)} totals"
            )
        if any(t < 0 for t in self.totals):
            raise InvalidProfileError("per-bin totals must be non-negative")
        if self.rule not in DEMAND_RULES:
            raise InvalidProfileError(f"unknown rule {self.rule!r}; expected one of {DEMAND_RULES}")
        if self.rule == "gravity-by-path-time" and self.alpha <= 0:
            raise InvalidProfileError("gravity alpha must be positive")
        if self.rule == "peaked-commuter":
            n = len(self.bins)
            for idx in (*self.inbound_bins, *self.outbound_bins):
                if not 0 <= idx < n:
                    raise InvalidProfileError(f"peak bin index {idx} out of range for {n} bins")
            if self.peak_factor <= 0:
                raise InvalidProfileError("peak factor must be positive")


def load_profile(path) -> DemandProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot open file: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path=path) from exc
    return profile_from_dict(raw)


def profile_from_dict(raw: dict) -> DemandProfile:
    try:
        spec = raw.get("bins", {})
        service = date.fromisoformat(spec.get("date", DEFAULT_SERVICE_DATE.isoformat()))
        first = time.fromisoformat(spec.get("start", DEFAULT_FIRST_BIN.isoformat()))
        duration = float(spec.get("duration_min", DEFAULT_BIN_MINUTES))
        count = int(spec.get("count", DEFAULT_BIN_COUNT))
        bins = default_bins(service, first, duration, count)
        totals = tuple(int(t) for t in raw["totals"])
        params = raw.get("params", {})
        centers = params.get("centers")
        profile = DemandProfile(
            bins=bins,
            totals=totals,
            rule=raw.get("rule", "uniform"),
            alpha=float(params.get("alpha", 2.0)),
            peak_factor=float(params.get("peak_factor", 4.0)),
            centers=tuple(int(c) for c in centers) if centers else None,
            inbound_bins=tuple(int(i) for i in params.get("inbound_bins", (0, 1))),
            outbound_bins=tuple(int(i) for i in params.get("outbound_bins", (4, 5))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidProfileError(f"malformed profile: {exc}") from exc
    profile.validate()
    return profile


def _auto_centers(g: StationGraph) -> tuple[int, ...]:
    # Top decile of stations by station-level degree, ties broken by id.
    ranked = sorted(g.station_ids, key=lambda sid: (-len(g.adjacency[sid]), sid))
    n = max(1, len(ranked) // 10)
    return tuple(sorted(ranked[:n]))


def generate_synthetic_demand(
    g: StationGraph, profile: DemandProfile, seed: int
) -> list[TripRecord]:
    """Draw trip records matching the profile totals exactly; deterministic in seed."""
    profile.validate()
    ids = g.station_ids
    n = len(ids)
    if n < 2:
        raise InvalidProfileError("graph must have at least two stations")
    pairs = [(o, d) for o in ids for d in ids if o != d]
    origins = np.array([p[0] for p in pairs])
    dests = np.array([p[1] for p in pairs])

    travel: np.ndarray | None = None
    if profile.rule == "gravity-by-path-time":
        from .routing import shortest_time_matrix

        matrix_ids, times = shortest_time_matrix(g)
        pos = {sid: i for i, sid in enumerate(matrix_ids)}
        travel = np.array([times[pos[o], pos[d]] for o, d in pairs])
        if not np.all(np.isfinite(travel)):
            raise InvalidProfileError("gravity rule needs a connected graph")

    centers: frozenset[int] = frozenset()
    if profile.rule == "peaked-commuter":
        centers = frozenset(profile.centers if profile.centers else _auto_centers(g))
        unknown = centers - set(ids)
        if unknown:
            raise InvalidProfileError(f"centre stations not in graph: {sorted(unknown)}")

    rng = np.random.default_rng(seed)
    records: list[TripRecord] = []
    for bin_idx, (time_bin, total) in enumerate(zip(profile.bins, profile.totals)):
        if profile.rule == "uniform":
            weights = np.ones(len(pairs))
        elif profile.rule == "gravity-by-path-time":
            weights = (1.0 / travel) ** profile.alpha
        else:
            weights = np.ones(len(pairs))
            if bin_idx in profile.inbound_bins:
                weights[np.isin(dests, tuple(centers))] *= profile.peak_factor
            if bin_idx in profile.outbound_bins:
                weights[np.isin(origins, tuple(centers))] *= profile.peak_factor
        probs = weights / weights.sum()
        counts = rng.multinomial(total, probs)
        offsets = rng.random(total) * time_bin.duration_min
        k = 0
        for pair_idx in np.nonzero(counts)[0]:
            o, d = pairs[pair_idx]
            ride = float(travel[pair_idx]) if travel is not None else 10.0
            for _ in range(int(counts[pair_idx])):
                entry = time_bin.start + timedelta(minutes=float(offsets[k]))
                records.append(TripRecord(entry, entry + timedelta(minutes=ride), o, d))
                k += 1
    return records
