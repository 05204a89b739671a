"""Importance time series, archetype clustering, multi-day rank frequencies,
and tie-corrected rank correlation.

Stations are clustered on the slopes between successive importance samples
(not on the levels), so curves that differ only by a constant offset land in
the same cluster.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster
from scipy.cluster.hierarchy import linkage as scipy_linkage

from .demand import ODMatrix, TimeBin
from .errors import AllTiesError, DegenerateSeriesError, LengthMismatchError, ValidationError
from .metrics import compute_bin_arrays
from .network import StationGraph
from .routing import PathCache

LINKAGE_METHODS = ("average", "single", "complete", "ward")


@dataclass(frozen=True)
class ImportanceSeries:
    station: int
    samples: tuple[tuple[TimeBin, float], ...]

    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.samples)

    def slopes(self) -> tuple[float, ...]:
        """Importance change per hour between successive samples."""
        if len(self.samples) < 2:
            raise DegenerateSeriesError(
                f"station {self.station}: need at least 2 samples, got {len(self.samples)}"
            )
        out = []
        for (b0, v0), (b1, v1) in zip(self.samples, self.samples[1:]):
            dt_hours = (b1.start - b0.start).total_seconds() / 3600.0
            out.append((v1 - v0) / dt_hours)
        return tuple(out)


@dataclass(frozen=True)
class ClusterAssignment:
    station: int
    cluster: int  # 1-based label


def importance_series(
    g: StationGraph, matrices: list[ODMatrix], cache: PathCache
) -> list[ImportanceSeries]:
    """Per-station importance across the day's bins, in station id order."""
    if not matrices:
        raise ValidationError("need at least one OD matrix")
    per_bin = [compute_bin_arrays(g, od, cache).importance for od in matrices]
    out = []
    for i, sid in enumerate(g.station_ids):
        samples = tuple((od.bin, float(per_bin[b][i])) for b, od in enumerate(matrices))
        out.append(ImportanceSeries(sid, samples))
    return out


def slope_matrix(series: list[ImportanceSeries]) -> np.ndarray:
    lengths = {len(s.samples) for s in series}
    if len(lengths) != 1:
        raise LengthMismatchError(f"series have differing lengths: {sorted(lengths)}")
    return np.array([s.slopes() for s in series])


def cluster_curves(
    series: list[ImportanceSeries], k: int, linkage: str = "average"
) -> list[ClusterAssignment]:
    """Agglomerative clustering of slope vectors, cut into k clusters.

    Labels are renumbered by first appearance in station id order, so the
    output is deterministic for identical inputs.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if linkage not in LINKAGE_METHODS:
        raise ValidationError(f"unknown linkage {linkage!r}; expected one of {LINKAGE_METHODS}")
    if not series:
        return []
    series = sorted(series, key=lambda s: s.station)
    feats = slope_matrix(series)
    if len(series) == 1:
        return [ClusterAssignment(series[0].station, 1)]
    Z = scipy_linkage(feats, method=linkage, metric="euclidean")
    raw = fcluster(Z, t=k, criterion="maxclust")
    relabel: dict[int, int] = {}
    out = []
    for s, label in zip(series, raw):
        if label not in relabel:
            relabel[label] = len(relabel) + 1
        out.append(ClusterAssignment(s.station, relabel[label]))
    return out


def cluster_tree(series: list[ImportanceSeries], linkage: str = "average") -> dict:
    """Merge tree for external dendrogram plotting.

    Node indices below the leaf count refer to ``leaves``; higher indices refer
    to earlier merges, in order.
    """
    if linkage not in LINKAGE_METHODS:
        raise ValidationError(f"unknown linkage {linkage!r}")
    series = sorted(series, key=lambda s: s.station)
    leaves = [s.station for s in series]
    if len(series) < 2:
        return {"leaves": leaves, "merges": []}
    Z = scipy_linkage(slope_matrix(series), method=linkage, metric="euclidean")
    merges = [
        {"left": int(a), "right": int(b), "distance": float(dist), "size": int(size)}
        for a, b, dist, size in Z
    ]
    return {"leaves": leaves, "merges": merges}


def cluster_mean_curves(
    series: list[ImportanceSeries], assignments: list[ClusterAssignment]
) -> dict[int, tuple[float, ...]]:
    """Mean importance curve per cluster label."""
    by_station = {s.station: s for s in series}
    groups: dict[int, list[ImportanceSeries]] = {}
    for a in assignments:
        groups.setdefault(a.cluster, []).append(by_station[a.station])
    out = {}
    for label in sorted(groups):
        stack = np.array([s.values() for s in groups[label]])
        out[label] = tuple(float(v) for v in stack.mean(axis=0))
    return out


def rank_frequency(rankings: list[list[int]]) -> list[tuple[int, int]]:
    """How often each station appears across the given top-m lists; sorted by
    count descending, ties by station id."""
    counts = Counter()
    for listing in rankings:
        counts.update(listing)
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def write_frequency_tables(directory, groups: dict) -> list:
    """One ``frequency_<group>.csv`` per day-group (e.g. weekday/weekend/all).

    ``groups`` maps a group name to its collection of top-m lists; each file
    holds ``station_id,frequency`` rows in rank order.
    """
    import csv
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for group in sorted(groups):
        path = directory / f"frequency_{group}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["station_id", "frequency"])
            for station, count in rank_frequency(groups[group]):
                writer.writerow([station, count])
        written.append(path)
    return written


def kendall_tau(x, y) -> float:
    """Tie-corrected (tau-b) rank correlation in [-1, 1].

    Raises AllTiesError when either input is entirely tied (the correlation is
    undefined and callers should report an explicit marker).
    """
    if len(x) != len(y):
        raise LengthMismatchError(f"sequences differ in length: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise LengthMismatchError(f"need at least 2 observations, got {n}")
    concordant = discordant = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            if x[i] == x[j] or y[i] == y[j]:
                continue
            agree = (x[i] < x[j]) == (y[i] < y[j])
            if agree:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    n1 = sum(c * (c - 1) // 2 for c in Counter(x).values())
    n2 = sum(c * (c - 1) // 2 for c in Counter(y).values())
    denom = (n0 - n1) * (n0 - n2)
    if denom <= 0:
        raise AllTiesError("rank correlation undefined: an input is entirely tied")
    return (concordant - discordant) / denom**0.5


def top_m_per_bin(series: list[ImportanceSeries], m: int) -> list[list[int]]:
    """For each bin, the m highest-importance stations (ties by id)."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    if not series:
        return []
    n_bins = len(series[0].samples)
    out = []
    for b in range(n_bins):
        scored = sorted(series, key=lambda s: (-s.samples[b][1], s.station))
        out.append([s.station for s in scored[:m]])
    return out
