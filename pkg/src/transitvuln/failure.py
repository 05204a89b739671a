"""Deliberate-attack campaigns: cumulative removals with an efficiency curve.

Every campaign produces a VulnerabilityCurve whose step values are fresh
psi_long evaluations on the reconstructed graph; nothing is carried over
between steps, so each step is independently recomputable from the cumulative
removal set. Rankings are fixed before the campaign starts (they are not
re-derived as the graph shrinks). When a plan's next target was already
removed earlier (a transfer station shared between lines), it is skipped and
no step is consumed, keeping the curve x-axis equal to the count of distinct
removed stations. A campaign that exhausts the graph is truncated and flagged
instead of raising, so partial curves are still reported.
"""

from __future__ import annotations

from dataclasses import dataclass

from .demand import ODMatrix
from .errors import UnknownLineError, UnknownStationError, ValidationError
from .metrics import compute_bin_arrays
from .network import StationGraph, remove_line, remove_stations
from .routing import DEFAULT_K, PathCache
from .vulnerability import psi_long

DIRECTION_MODES = ("from-top-station", "smaller-degree-direction", "alternating")

ATTACK_KINDS = (
    "single-station",
    "within-line-interval",
    "adjacent-interval",
    "cross-line-interval",
    "line-removal",
)


@dataclass(frozen=True)
class CurveStep:
    removed: tuple[int, ...]  # cumulative removed station ids, in removal order
    value: float


@dataclass(frozen=True)
class VulnerabilityCurve:
    steps: tuple[CurveStep, ...]
    terminated_early: bool = False

    @property
    def baseline(self) -> float:
        return self.steps[0].value

    def values(self) -> tuple[float, ...]:
        return tuple(s.value for s in self.steps)

    def largest_drop(self) -> tuple[float, int]:
        """(largest one-step decrease, index of the step where it happened)."""
        best = 0.0
        at = 0
        for i in range(1, len(self.steps)):
            drop = self.steps[i - 1].value - self.steps[i].value
            if drop > best:
                best = drop
                at = i
        return best, at


# ---------------------------------------------------------------------------
# Rankings derived from one bin's importance
# ---------------------------------------------------------------------------


def importance_by_station(g: StationGraph, od: ODMatrix, cache: PathCache) -> dict[int, float]:
    arrays = compute_bin_arrays(g, od, cache)
    return {sid: float(z) for sid, z in zip(arrays.station_ids, arrays.importance)}


def rank_stations_by_importance(g: StationGraph, od: ODMatrix, cache: PathCache) -> list[int]:
    zeta = importance_by_station(g, od, cache)
    return sorted(zeta, key=lambda sid: (-zeta[sid], sid))


def rank_lines_by_importance(g: StationGraph, od: ODMatrix, cache: PathCache) -> list[str]:
    """Lines ordered by mean member importance, descending."""
    zeta = importance_by_station(g, od, cache)
    means = {}
    for line in sorted(g.lines):
        members = g.line_stations(line)
        means[line] = sum(zeta[s] for s in members) / len(members) if members else 0.0
    return sorted(means, key=lambda line: (-means[line], line))


def rank_adjacent_pairs_by_importance(
    g: StationGraph, od: ODMatrix, cache: PathCache
) -> list[tuple[int, int]]:
    """All adjacent station pairs, network-wide, by summed importance."""
    zeta = importance_by_station(g, od, cache)
    pairs = sorted({(min(e.a, e.b), max(e.a, e.b)) for e in g.edges})
    return sorted(pairs, key=lambda p: (-(zeta[p[0]] + zeta[p[1]]), p))


# ---------------------------------------------------------------------------
# Line geometry helpers
# ---------------------------------------------------------------------------


def line_sequence(g: StationGraph, line: str) -> tuple[list[int], bool]:
    """Stations of a line in track order, plus whether the line is a ring.

    Paths start at the smaller-id terminus; rings start at the smallest id and
    proceed towards the smaller-id neighbour. Branched lines are rejected.
    """
    members = list(g.line_stations(line))
    adj: dict[int, list[int]] = {s: [] for s in members}
    for e in g.edges:
        if e.line == line:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
    if len(members) == 1:
        return members, False
    degrees = {s: len(v) for s, v in adj.items()}
    if any(d > 2 for d in degrees.values()):
        raise ValidationError(f"line {line!r} branches; interval attacks need a path or ring")
    endpoints = sorted(s for s, d in degrees.items() if d == 1)
    if endpoints:
        if len(endpoints) != 2:
            raise ValidationError(f"line {line!r} is not a single connected path")
        start = endpoints[0]
        is_cycle = False
    else:
        start = min(members)
        is_cycle = True
    seq = [start]
    prev = None
    cur = start
    while True:
        nxts = sorted(n for n in adj[cur] if n != prev)
        if not nxts:
            break
        nxt = nxts[0]
        if nxt == start:
            break
        seq.append(nxt)
        prev, cur = cur, nxt
    if len(seq) != len(members):
        raise ValidationError(f"line {line!r} is not a single connected path or ring")
    return seq, is_cycle


def _within_line_order(
    seq: list[int], is_cycle: bool, mode: str, zeta: dict[int, float], degree: dict[int, int]
) -> list[int]:
    """Removal order inside one line: seed at the most important station, then
    proceed stationwise according to the direction mode."""
    n = len(seq)
    seed_pos = min(range(n), key=lambda i: (-zeta[seq[i]], seq[i]))
    order = [seq[seed_pos]]
    if n == 1:
        return order

    def step(pos: int, inc: int):
        nxt = pos + inc
        if is_cycle:
            return nxt % n
        return nxt if 0 <= nxt < n else None

    left = step(seed_pos, -1)
    right = step(seed_pos, +1)
    taken = {seed_pos}

    def available(pos):
        return pos is not None and pos not in taken

    def pick_initial() -> str:
        if not available(left):
            return "R"
        if not available(right):
            return "L"
        ls, rs = seq[left], seq[right]
        if mode == "smaller-degree-direction":
            lkey, rkey = (degree[ls], ls), (degree[rs], rs)
            return "L" if lkey < rkey else "R"
        # from-top-station and alternating both start towards the more
        # important neighbour
        lkey, rkey = (-zeta[ls], ls), (-zeta[rs], rs)
        return "L" if lkey < rkey else "R"

    side = pick_initial()
    while len(order) < n:
        if mode == "alternating":
            if not available(left) and not available(right):
                break
            if side == "L" and not available(left):
                side = "R"
            elif side == "R" and not available(right):
                side = "L"
        else:
            if side == "L" and not available(left):
                side = "R"
            elif side == "R" and not available(right):
                side = "L"
            if (side == "L" and not available(left)) or (side == "R" and not available(right)):
                break
        if side == "L":
            order.append(seq[left])
            taken.add(left)
            left = step(left, -1)
            if left in taken:
                left = None
        else:
            order.append(seq[right])
            taken.add(right)
            right = step(right, +1)
            if right in taken:
                right = None
        if mode == "alternating":
            side = "R" if side == "L" else "L"
    return order


def _line_tiles(seq: list[int], width: int, zeta: dict[int, float]) -> list[list[int]]:
    """Consecutive width-sized blocks; the highest-importance tile goes first,
    the rest follow cyclically along the line."""
    tiles = [seq[i : i + width] for i in range(0, len(seq), width)]
    scores = [sum(zeta[s] for s in tile) for tile in tiles]
    seed = max(range(len(tiles)), key=lambda i: (scores[i], -i))
    return [tiles[(seed + j) % len(tiles)] for j in range(len(tiles))]


# ---------------------------------------------------------------------------
# Campaign executors
# ---------------------------------------------------------------------------


def _run_batches(g: StationGraph, od: ODMatrix, batches, k: int, workers: int) -> VulnerabilityCurve:
    steps = [CurveStep((), psi_long(g, od, k, workers=workers))]
    removed: list[int] = []
    removed_set: set[int] = set()
    current = g
    terminated = False
    for batch in batches:
        batch = [s for s in batch if s not in removed_set]
        if not batch:
            continue  # fully absorbed by earlier removals: no step consumed
        current = remove_stations(current, batch)
        removed.extend(batch)
        removed_set.update(batch)
        if current.n_stations < 2:
            terminated = True
            break
        steps.append(CurveStep(tuple(removed), psi_long(current, od, k, workers=workers)))
    return VulnerabilityCurve(tuple(steps), terminated)


def single_station_attack(
    g: StationGraph,
    od: ODMatrix,
    ranking: list[int],
    m: int,
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> VulnerabilityCurve:
    """Remove the m top-ranked stations one at a time."""
    if m > len(ranking):
        raise ValidationError(f"m={m} exceeds ranking length {len(ranking)}")
    if len(set(ranking)) != len(ranking):
        raise ValidationError("ranking contains duplicate stations")
    for sid in ranking:
        if not g.has_station(sid):
            raise UnknownStationError(f"unknown station id {sid}")
    return _run_batches(g, od, [[s] for s in ranking[:m]], k, workers)


def within_line_interval_attack(
    g: StationGraph,
    od: ODMatrix,
    cache: PathCache,
    line_order: list[str] | None = None,
    direction: str = "from-top-station",
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> VulnerabilityCurve:
    """Fail stations line by line, seeding each line at its most important
    station and walking outward per the direction mode."""
    if direction not in DIRECTION_MODES:
        raise ValidationError(f"unknown direction {direction!r}; expected one of {DIRECTION_MODES}")
    if line_order is None:
        line_order = rank_lines_by_importance(g, od, cache)
    for line in line_order:
        if line not in g.lines:
            raise UnknownLineError(f"unknown line {line!r}")
    zeta = importance_by_station(g, od, cache)
    degree = {sid: len(g.adjacency[sid]) for sid in g.station_ids}
    batches = []
    for line in line_order:
        seq, is_cycle = line_sequence(g, line)
        for sid in _within_line_order(seq, is_cycle, direction, zeta, degree):
            batches.append([sid])
    return _run_batches(g, od, batches, k, workers)


def adjacent_interval_attack(
    g: StationGraph,
    od: ODMatrix,
    cache: PathCache,
    width: int,
    line_order: list[str] | None = None,
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> VulnerabilityCurve:
    """Fail blocks of ``width`` adjacent stations line by line, most important
    block first."""
    if width not in (2, 3):
        raise ValidationError(f"interval width must be 2 or 3, got {width}")
    if line_order is None:
        line_order = rank_lines_by_importance(g, od, cache)
    for line in line_order:
        if line not in g.lines:
            raise UnknownLineError(f"unknown line {line!r}")
    zeta = importance_by_station(g, od, cache)
    batches = []
    for line in line_order:
        seq, _ = line_sequence(g, line)
        batches.extend(_line_tiles(seq, width, zeta))
    return _run_batches(g, od, batches, k, workers)


def cross_line_interval_attack(
    g: StationGraph,
    od: ODMatrix,
    pair_ranking: list[tuple[int, int]],
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> VulnerabilityCurve:
    """Fail adjacent station pairs network-wide in ranking order."""
    for a, b in pair_ranking:
        for sid in (a, b):
            if not g.has_station(sid):
                raise UnknownStationError(f"unknown station id {sid}")
        if b not in g.adjacency[a]:
            raise ValidationError(f"stations {a} and {b} are not adjacent")
    return _run_batches(g, od, [list(p) for p in pair_ranking], k, workers)


def line_removal_attack(
    g: StationGraph,
    od: ODMatrix,
    line_order: list[str],
    k: int = DEFAULT_K,
    *,
    workers: int = 1,
) -> VulnerabilityCurve:
    """Fail whole lines cumulatively."""
    if not line_order:
        raise ValidationError("line order must be nonempty")
    for line in line_order:
        if line not in g.lines:
            raise UnknownLineError(f"unknown line {line!r}")
    steps = [CurveStep((), psi_long(g, od, k, workers=workers))]
    removed: list[int] = []
    current = g
    terminated = False
    for line in line_order:
        if line not in current.lines:
            continue
        before = set(current.station_ids)
        current = remove_line(current, line)
        removed.extend(sorted(before - set(current.station_ids)))
        if current.n_stations < 2:
            terminated = True
            break
        steps.append(CurveStep(tuple(removed), psi_long(current, od, k, workers=workers)))
    return VulnerabilityCurve(tuple(steps), terminated)
