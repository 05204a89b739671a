"""Independent brute-force reference implementations.

Everything here works by exhaustive enumeration over the station-level graph
and deliberately shares no code with the package's search machinery; it reads
only the public data fields of StationGraph. Usable up to ~12 stations.

Line assignments consider one transfer arc per line change. The test fixtures
give every transfer station a single walking time shared by all its line
pairs, which makes multi-arc transfer chains strictly slower and keeps this
enumeration exhaustive.
"""

from __future__ import annotations

import itertools
import math


def _adjacency(g):
    adj: dict[int, dict[int, list[tuple[str, float]]]] = {}
    for e in g.edges:
        adj.setdefault(e.a, {}).setdefault(e.b, []).append((e.line, e.run_time))
        adj.setdefault(e.b, {}).setdefault(e.a, []).append((e.line, e.run_time))
    return adj


def _arcs(g):
    return {(t.station, t.from_line, t.to_line): t.transfer_time for t in g.transfer_arcs}


def all_simple_paths(g, origin, destination):
    adj = _adjacency(g)
    out = []

    def dfs(node, visited, trail):
        if node == destination:
            out.append(tuple(trail))
            return
        for nxt in sorted(adj.get(node, {})):
            if nxt not in visited:
                visited.add(nxt)
                trail.append(nxt)
                dfs(nxt, visited, trail)
                trail.pop()
                visited.discard(nxt)

    if origin in adj:
        dfs(origin, {origin}, [origin])
    return out


def path_key(g, stations):
    """Minimal (total time, transfers, transfer time) over line assignments,
    or None when no assignment works."""
    adj = _adjacency(g)
    arcs = _arcs(g)
    legs = list(zip(stations, stations[1:]))
    options = [adj[a][b] for a, b in legs]
    best = None
    for assignment in itertools.product(*options):
        ride = sum(t for _, t in assignment)
        transfers = 0
        transfer_time = 0.0
        feasible = True
        for (l1, _), (l2, _), mid in zip(assignment, assignment[1:], stations[1:-1]):
            if l1 != l2:
                w = arcs.get((mid, l1, l2))
                if w is None:
                    feasible = False
                    break
                transfers += 1
                transfer_time += w
        if not feasible:
            continue
        key = (ride + transfer_time, transfers, transfer_time)
        if best is None or key < best:
            best = key
    return best


def reasonable(g, origin, destination):
    """(sorted minimal path tuples, their shared key) or ([], None)."""
    keyed = []
    for path in all_simple_paths(g, origin, destination):
        key = path_key(g, path)
        if key is not None:
            keyed.append((path, key))
    if not keyed:
        return [], None
    best = min(key for _, key in keyed)
    return sorted(p for p, key in keyed if key == best), best


def all_reasonable(g, k=None):
    """Every ordered pair's reasonable paths with equal split weights."""
    out = {}
    ids = sorted(s.id for s in g.stations)
    for o in ids:
        for d in ids:
            if o == d:
                continue
            paths, key = reasonable(g, o, d)
            if not paths:
                continue
            if k is not None:
                paths = paths[:k]
            weight = 1.0 / len(paths)
            out[(o, d)] = (paths, [weight] * len(paths), key)
    return out


# ---------------------------------------------------------------------------
# Metrics by direct summation
# ---------------------------------------------------------------------------


def weighted_degree(g, flows, station, rs=None):
    rs = rs if rs is not None else all_reasonable(g)
    total = 0.0
    for pair, f in flows.items():
        if f <= 0 or pair not in rs:
            continue
        paths, weights, _ = rs[pair]
        for path, w in zip(paths, weights):
            for a, b in zip(path, path[1:]):
                if station in (a, b):
                    total += f * w
    return total


def flow_betweenness(g, flows, station, rs=None):
    rs = rs if rs is not None else all_reasonable(g)
    total = 0.0
    for (o, d), f in flows.items():
        if f <= 0 or (o, d) not in rs or station in (o, d):
            continue
        paths, weights, _ = rs[(o, d)]
        through = sum(w for path, w in zip(paths, weights) if station in path[1:-1])
        total += through
    return total


def demand_closeness(g, flows, station):
    n = len(g.stations)
    outflow = sum(f for (o, _), f in flows.items() if o == station and f > 0)
    return (n - 1) / outflow if outflow > 0 else math.inf


def importance(g, flows, station, rs=None):
    rs = rs if rs is not None else all_reasonable(g)
    s_total = sum(f for f in flows.values() if f > 0)
    if s_total == 0:
        return 0.0
    active = set()
    for (o, d), f in flows.items():
        if f > 0:
            active.add(o)
            active.add(d)
    s_out = s_in = s_pass = 0.0
    out_partners = set()
    in_partners = set()
    pass_endpoints = set()
    for (o, d), f in flows.items():
        if f <= 0:
            continue
        if d == station:
            s_out += f
            out_partners.add(o)
        if o == station:
            s_in += f
            in_partners.add(d)
        if (o, d) in rs:
            paths, _, _ = rs[(o, d)]
            if any(station in p[1:-1] for p in paths):
                s_pass += f
                pass_endpoints.add(o)
                pass_endpoints.add(d)
    numerator = (
        s_out * len(out_partners) + s_in * len(in_partners) + s_pass * len(pass_endpoints)
    )
    return numerator / (s_total * len(active))


def psi_short(g, flows, targets, delay, rs=None):
    rs = rs if rs is not None else all_reasonable(g)
    n = len(g.stations)
    total = 0.0
    for (o, d), f in flows.items():
        if f <= 0:
            continue
        paths, _, key = rs[(o, d)]
        affected = o in targets or d in targets
        if not affected:
            affected = any(any(s in targets for s in p[1:-1]) for p in paths)
        tau = key[0] + (delay if affected else 0.0)
        total += tau * f
    return total / (n * (n - 1))


def psi_long(g_prime, flows):
    n = len(g_prime.stations)
    surviving = {s.id for s in g_prime.stations}
    total = 0.0
    for (o, d), f in flows.items():
        if f <= 0 or o not in surviving or d not in surviving:
            continue
        _, key = reasonable(g_prime, o, d)
        if key is None:
            continue
        total += f / key[0]
    return total / (n * (n - 1))


def topo_betweenness(g, station):
    """Share of time-minimal loopless paths crossing the station, over ordered
    pairs, normalised by (N-1)(N-2)."""
    ids = sorted(s.id for s in g.stations)
    n = len(ids)
    if n < 3:
        return 0.0
    total = 0.0
    for o in ids:
        for d in ids:
            if o == d:
                continue
            keyed = []
            for path in all_simple_paths(g, o, d):
                key = path_key(g, path)
                if key is not None:
                    keyed.append((path, key[0]))
            if not keyed:
                continue
            best = min(t for _, t in keyed)
            minimal = [p for p, t in keyed if t == best]
            crossing = sum(1 for p in minimal if station in p[1:-1])
            total += crossing / len(minimal)
    return total / ((n - 1) * (n - 2))
