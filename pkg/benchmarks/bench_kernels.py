#!/usr/bin/env python3
"""Benchmark: compiled search kernel vs the pure-Python fallback.

Times the operations that dominate real workloads: the per-origin shortest
path sweep, a full efficiency evaluation, the all-pairs cache build, and a
short attack campaign. Run after building the extension:

    python3 setup.py build_ext --inplace
    python3 benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

from transitvuln import build_path_cache, fixtures, kernels
from transitvuln.failure import single_station_attack
from transitvuln.routing import _dest_summary, _source_labels, expand
from transitvuln.vulnerability import psi_long


def time_call(fn, repeats=1):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def sweep_all_sources(exp):
    for origin in range(exp.n_stations):
        labels = _source_labels(exp, origin)
        _dest_summary(exp, origin, labels)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller network, fewer steps")
    args = parser.parse_args()

    if args.quick:
        g = fixtures.grid_network(4, 20, (5, 14), seed=1)
        attack_steps = 3
    else:
        g = fixtures.grid_network(10, 30, (2, 9, 16, 23, 29), seed=1)
        attack_steps = 5
    od = fixtures.uniform_od(g, 1.0)
    exp = expand(g)
    ranking = sorted(g.station_ids)[:attack_steps]

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("warning: compiled extension not built; timing the pure-Python kernel only")

    print(f"network: {g.n_stations} stations, {len(g.edges)} edges, {len(g.lines)} lines")
    print(f"{'operation':<28}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")

    rows = [
        ("all-source sweep", lambda: sweep_all_sources(exp)),
        ("psi_long (one evaluation)", lambda: psi_long(g, od)),
        ("path cache build", lambda: build_path_cache(g)),
        (f"attack ({attack_steps} steps)", lambda: single_station_attack(g, od, ranking, attack_steps)),
    ]

    for label, fn in rows:
        timings = {}
        for backend in backends:
            previous = kernels.set_backend(backend)
            try:
                timings[backend] = time_call(fn)
            finally:
                kernels.set_backend(previous)
        cells = "".join(f"{timings[b]:>13.3f}s" for b in backends)
        if "compiled" in timings and "python" in timings and timings["compiled"] > 0:
            ratio = f"{timings['python'] / timings['compiled']:>9.1f}x"
        else:
            ratio = f"{'n/a':>10}"
        print(f"{label:<28}{cells}{ratio}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
