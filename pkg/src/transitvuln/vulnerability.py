"""Disruption classification and the two vulnerability indices.

Short delays leave the network intact: every affected pair's travel time grows
by the delay, and the index is the flow-weighted travel burden averaged over
ordered station pairs. A pair counts as affected when the disruption touches
its origin, its destination, or any station interior to one of its reasonable
paths.

Long delays remove the targeted stations outright: the index becomes the
operational efficiency of the reconstructed graph, i.e. the flow-weighted sum
of inverse travel times over surviving pairs (unreachable pairs contribute
zero, and pairs losing an endpoint are assumed to leave the system).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .demand import ODMatrix, TimeBin
from .errors import (
    EmptyGraphError,
    MisclassifiedDisruptionError,
    UnknownStationError,
    UnreachableError,
    ValidationError,
)
from .metrics import dense_flows
from .network import StationGraph
from .routing import DEFAULT_K, PathCache, expand, loopless_times_from

DEFAULT_TAU_STAR = 60.0


@dataclass(frozen=True)
class Disruption:
    targets: frozenset[int]
    delay_min: float
    bin: TimeBin | None = None

    def __post_init__(self):
        if not self.targets:
            raise ValidationError("disruption needs at least one target station")
        if not (math.isfinite(self.delay_min) and self.delay_min >= 0):
            raise ValidationError(f"delay must be finite and non-negative, got {self.delay_min}")


@dataclass(frozen=True)
class DisruptionClass:
    kind: str  # "short" | "long"
    threshold: float


def classify(d: Disruption, threshold: float = DEFAULT_TAU_STAR) -> DisruptionClass:
    """Short iff the delay does not exceed the threshold (boundary is short)."""
    if not threshold > 0:
        raise ValidationError(f"threshold must be positive, got {threshold}")
    kind = "short" if d.delay_min <= threshold else "long"
    return DisruptionClass(kind, threshold)


def psi_short(
    g: StationGraph,
    od: ODMatrix,
    cache: PathCache,
    disruption: Disruption,
    *,
    tau_star: float = DEFAULT_TAU_STAR,
) -> float:
    """Mean delayed travel burden over ordered pairs under an intact network."""
    if classify(disruption, tau_star).kind != "short":
        raise MisclassifiedDisruptionError(
            f"delay {disruption.delay_min} exceeds threshold {tau_star}; use psi_long"
        )
    if cache.graph_version != g.version:
        raise ValidationError(
            f"path cache was built for graph version {cache.graph_version}, got {g.version}"
        )
    for t in disruption.targets:
        if not g.has_station(t):
            raise UnknownStationError(f"unknown target station {t}")

    ma = cache.metric_arrays()
    F = dense_flows(g, od)
    f = F[ma.pair_o, ma.pair_d]
    if int((f > 0).sum()) != sum(1 for v in od.flows.values() if v > 0):
        raise UnreachableError(
            "demand includes flow on pairs with no reasonable path in the baseline graph"
        )

    affected = _affected_mask(g, ma, disruption.targets)
    n = g.n_stations
    base = float(ma.pair_time @ f)
    delayed = float(f[affected].sum())
    return (base + disruption.delay_min * delayed) / (n * (n - 1))


def _affected_mask(g: StationGraph, ma, targets) -> np.ndarray:
    """Per cached pair: origin, destination, or any reasonable-path interior
    station hit by the targets."""
    idx = {sid: i for i, sid in enumerate(g.station_ids)}
    target_idx = np.array(sorted(idx[t] for t in targets), np.int32)
    affected = np.isin(ma.pair_o, target_idx) | np.isin(ma.pair_d, target_idx)
    counts = np.diff(ma.int_ptr)
    pair_of_row = np.repeat(np.arange(len(ma.pair_o)), counts)
    affected[pair_of_row[np.isin(ma.int_station, target_idx)]] = True
    return affected


def affected_pair_count(g: StationGraph, od: ODMatrix, cache: PathCache, targets) -> int:
    """Positive-flow pairs whose travel is touched by a disruption at the targets."""
    for t in targets:
        if not g.has_station(t):
            raise UnknownStationError(f"unknown target station {t}")
    ma = cache.metric_arrays()
    F = dense_flows(g, od)
    f = F[ma.pair_o, ma.pair_d]
    affected = _affected_mask(g, ma, targets)
    return int(((f > 0) & affected).sum())


def psi_long(
    g_prime: StationGraph,
    od: ODMatrix,
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> float:
    """Operational efficiency of the reconstructed graph.

    Travel times are recomputed from scratch on ``g_prime`` (the reasonable
    path time of a pair does not depend on ``k``); flows touching removed
    stations contribute nothing.
    """
    n = g_prime.n_stations
    if n < 2:
        raise EmptyGraphError(f"need at least two stations, got {n}")
    exp = expand(g_prime)
    idx = exp.id_to_idx

    flows_by_origin: dict[int, list[tuple[int, float]]] = {}
    for (o, d), f in od.flows.items():
        if f <= 0:
            continue
        io = idx.get(o)
        jd = idx.get(d)
        if io is None or jd is None:
            continue  # endpoint removed: passengers switch modes
        flows_by_origin.setdefault(io, []).append((jd, f))

    origins = sorted(flows_by_origin)

    def contribution(io: int) -> float:
        times = loopless_times_from(exp, io)
        acc = 0.0
        for jd, f in flows_by_origin[io]:
            t = times[jd]
            if t != math.inf:
                acc += f / t
        return acc

    if workers > 1 and len(origins) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(contribution, origins))
    else:
        parts = [contribution(io) for io in origins]
    return float(sum(parts)) / (n * (n - 1))
