"""Pure-Python search kernels (fallback when the compiled extension is absent).

Both kernels operate on the line-expanded graph in CSR form. Labels are the
lexicographic triple (total time, transfer count, transfer time); ties are
detected by exact float equality, which is reliable because edge weights come
from decimal-minute inputs and path sums stay well inside double precision.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

INF = math.inf


def lex_dijkstra(n_exp, indptr, nbr, w_time, w_tc, w_tt, sources):
    """Multi-source Dijkstra with lexicographic labels over the expanded graph.

    Returns per-node best labels plus the predecessor DAG (CSR): every
    predecessor achieving the node's optimal label is kept, so all optimal
    walks can be reconstructed.
    """
    ipt = indptr.tolist()
    nb = nbr.tolist()
    wt = w_time.tolist()
    wc = w_tc.tolist()
    wx = w_tt.tolist()

    dt = [INF] * n_exp
    dc = [0] * n_exp
    dx = [0.0] * n_exp
    preds: list = [None] * n_exp
    settled = bytearray(n_exp)

    heap = []
    for s in sources.tolist():
        dt[s] = 0.0
        preds[s] = []
        heapq.heappush(heap, (0.0, 0, 0.0, s))

    pop = heapq.heappop
    push = heapq.heappush
    while heap:
        t, c, x, v = pop(heap)
        if settled[v]:
            continue
        settled[v] = 1
        for e in range(ipt[v], ipt[v + 1]):
            u = nb[e]
            if settled[u]:
                continue
            nt = t + wt[e]
            ut = dt[u]
            if nt > ut:
                continue
            nc = c + wc[e]
            nx = x + wx[e]
            if nt == ut:
                uc = dc[u]
                if nc > uc:
                    continue
                if nc == uc:
                    ux = dx[u]
                    if nx > ux:
                        continue
                    if nx == ux:
                        preds[u].append(v)
                        continue
            dt[u] = nt
            dc[u] = nc
            dx[u] = nx
            preds[u] = [v]
            push(heap, (nt, nc, nx, u))

    pred_ptr = np.zeros(n_exp + 1, np.int32)
    total = 0
    for v in range(n_exp):
        if preds[v]:
            total += len(preds[v])
        pred_ptr[v + 1] = total
    pred_flat = np.empty(total, np.int32)
    for v in range(n_exp):
        lst = preds[v]
        if lst:
            pred_flat[pred_ptr[v] : pred_ptr[v + 1]] = lst

    return (
        np.array(dt, np.float64),
        np.array(dc, np.int32),
        np.array(dx, np.float64),
        pred_ptr,
        pred_flat,
    )


def first_loopless(
    n_stations,
    origin,
    exp_station,
    st_ptr,
    st_exp,
    dist_time,
    dist_tc,
    dist_tt,
    pred_ptr,
    pred_flat,
    budget,
):
    """Per destination station: best label plus a station-loopless witness path.

    Walks the predecessor DAG depth-first looking for one optimal walk that
    never revisits a station (consecutive same-station hops are transfers and
    do not count as revisits). Status per destination: 0 unreachable, 1 label
    confirmed loopless, 2 undecided within budget (caller must fall back to an
    exact loopless search).
    """
    es = exp_station.tolist()
    stp = st_ptr.tolist()
    ste = st_exp.tolist()
    t = dist_time.tolist()
    c = dist_tc.tolist()
    x = dist_tt.tolist()
    pp = pred_ptr.tolist()
    pf = pred_flat.tolist()

    out_t = np.full(n_stations, INF, np.float64)
    out_c = np.zeros(n_stations, np.int32)
    out_x = np.zeros(n_stations, np.float64)
    status = np.zeros(n_stations, np.uint8)

    stamped = bytearray(n_stations)

    for d in range(n_stations):
        if d == origin:
            out_t[d] = 0.0
            status[d] = 1
            continue
        best_t = INF
        best_c = 0
        best_x = 0.0
        for i in range(stp[d], stp[d + 1]):
            v = ste[i]
            tv = t[v]
            if tv == INF:
                continue
            if (
                tv < best_t
                or (tv == best_t and c[v] < best_c)
                or (tv == best_t and c[v] == best_c and x[v] < best_x)
            ):
                best_t, best_c, best_x = tv, c[v], x[v]
        if best_t == INF:
            continue
        starts = [
            ste[i]
            for i in range(stp[d], stp[d + 1])
            if t[ste[i]] == best_t and c[ste[i]] == best_c and x[ste[i]] == best_x
        ]

        found = False
        over_budget = False
        steps = 0
        stamped[d] = 1
        for s0 in starts:
            # frames: [node, next pred cursor, station stamped on entry or -1]
            stack = [[s0, pp[s0], -1]]
            while stack:
                frame = stack[-1]
                node = frame[0]
                if es[node] == origin:
                    found = True
                    break
                cursor = frame[1]
                if cursor >= pp[node + 1]:
                    stack.pop()
                    if frame[2] >= 0:
                        stamped[frame[2]] = 0
                    continue
                frame[1] = cursor + 1
                u = pf[cursor]
                su = es[u]
                steps += 1
                if steps > budget:
                    over_budget = True
                    break
                if su == es[node]:
                    stack.append([u, pp[u], -1])
                elif not stamped[su]:
                    stamped[su] = 1
                    stack.append([u, pp[u], su])
            for frame in stack:
                if frame[2] >= 0:
                    stamped[frame[2]] = 0
            if found or over_budget:
                break
        stamped[d] = 0

        if found:
            out_t[d] = best_t
            out_c[d] = best_c
            out_x[d] = best_x
            status[d] = 1
        else:
            # Either budget exhausted or every optimal walk revisits a station;
            # both cases need the exact loopless search.
            status[d] = 2

    return out_t, out_c, out_x, status
