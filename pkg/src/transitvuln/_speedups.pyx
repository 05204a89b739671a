# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled search kernels; exact behavioural twin of ``_pykernels``.

Label ties are detected by exact float equality, matching the pure-Python
kernel bit for bit (both accumulate edge weights in the same order).
"""

from libc.stdlib cimport free, malloc

import numpy as np


cdef inline bint lex_less(double t1, int c1, double x1,
                          double t2, int c2, double x2) nogil:
    if t1 != t2:
        return t1 < t2
    if c1 != c2:
        return c1 < c2
    return x1 < x2


cdef void heap_push(double* ht, int* hc, double* hx, int* hn, int* size,
                    double t, int c, double x, int node) nogil:
    cdef int i = size[0]
    cdef int parent
    cdef double tmp_t, tmp_x
    cdef int tmp_c, tmp_n
    size[0] += 1
    ht[i] = t
    hc[i] = c
    hx[i] = x
    hn[i] = node
    while i > 0:
        parent = (i - 1) >> 1
        if lex_less(ht[i], hc[i], hx[i], ht[parent], hc[parent], hx[parent]):
            tmp_t = ht[i]; ht[i] = ht[parent]; ht[parent] = tmp_t
            tmp_c = hc[i]; hc[i] = hc[parent]; hc[parent] = tmp_c
            tmp_x = hx[i]; hx[i] = hx[parent]; hx[parent] = tmp_x
            tmp_n = hn[i]; hn[i] = hn[parent]; hn[parent] = tmp_n
            i = parent
        else:
            break


cdef void heap_pop(double* ht, int* hc, double* hx, int* hn, int* size) nogil:
    cdef int n = size[0] - 1
    cdef int i = 0
    cdef int child
    cdef double tmp_t, tmp_x
    cdef int tmp_c, tmp_n
    size[0] = n
    ht[0] = ht[n]; hc[0] = hc[n]; hx[0] = hx[n]; hn[0] = hn[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and lex_less(ht[child + 1], hc[child + 1], hx[child + 1],
                                      ht[child], hc[child], hx[child]):
            child += 1
        if lex_less(ht[child], hc[child], hx[child], ht[i], hc[i], hx[i]):
            tmp_t = ht[i]; ht[i] = ht[child]; ht[child] = tmp_t
            tmp_c = hc[i]; hc[i] = hc[child]; hc[child] = tmp_c
            tmp_x = hx[i]; hx[i] = hx[child]; hx[child] = tmp_x
            tmp_n = hn[i]; hn[i] = hn[child]; hn[child] = tmp_n
            i = child
        else:
            break


def lex_dijkstra(int n_exp, int[::1] indptr, int[::1] nbr, double[::1] w_time,
                 int[::1] w_tc, double[::1] w_tt, int[::1] sources):
    cdef int m = nbr.shape[0]
    cdef int ns = sources.shape[0]

    dt_arr = np.full(n_exp, np.inf, np.float64)
    dc_arr = np.zeros(n_exp, np.int32)
    dx_arr = np.zeros(n_exp, np.float64)
    settled_arr = np.zeros(n_exp, np.uint8)
    head_arr = np.full(n_exp, -1, np.int32)
    cdef double[::1] dt = dt_arr
    cdef int[::1] dc = dc_arr
    cdef double[::1] dx = dx_arr
    cdef unsigned char[::1] settled = settled_arr
    cdef int[::1] head = head_arr

    # One heap push per strict improvement (<= m) plus the sources; one pred
    # slot per relaxation (<= m). Preallocating removes reallocation from the
    # nogil loop.
    cdef int heap_cap = m + ns + 8
    cdef int pred_cap = m + 8
    cdef double* ht = <double*> malloc(heap_cap * sizeof(double))
    cdef int* hc = <int*> malloc(heap_cap * sizeof(int))
    cdef double* hx = <double*> malloc(heap_cap * sizeof(double))
    cdef int* hn = <int*> malloc(heap_cap * sizeof(int))
    cdef int* pred_val = <int*> malloc(pred_cap * sizeof(int))
    cdef int* pred_nxt = <int*> malloc(pred_cap * sizeof(int))
    if ht == NULL or hc == NULL or hx == NULL or hn == NULL or pred_val == NULL or pred_nxt == NULL:
        free(ht); free(hc); free(hx); free(hn); free(pred_val); free(pred_nxt)
        raise MemoryError()

    cdef int heap_size = 0
    cdef int n_pred = 0
    cdef int i, s, v, u, e
    cdef double t, x, nt, nx
    cdef int c, nc

    with nogil:
        for i in range(ns):
            s = sources[i]
            dt[s] = 0.0
            heap_push(ht, hc, hx, hn, &heap_size, 0.0, 0, 0.0, s)
        while heap_size > 0:
            t = ht[0]; c = hc[0]; x = hx[0]; v = hn[0]
            heap_pop(ht, hc, hx, hn, &heap_size)
            if settled[v]:
                continue
            settled[v] = 1
            for e in range(indptr[v], indptr[v + 1]):
                u = nbr[e]
                if settled[u]:
                    continue
                nt = t + w_time[e]
                if nt > dt[u]:
                    continue
                nc = c + w_tc[e]
                nx = x + w_tt[e]
                if nt == dt[u]:
                    if nc > dc[u]:
                        continue
                    if nc == dc[u]:
                        if nx > dx[u]:
                            continue
                        if nx == dx[u]:
                            pred_val[n_pred] = v
                            pred_nxt[n_pred] = head[u]
                            head[u] = n_pred
                            n_pred += 1
                            continue
                dt[u] = nt
                dc[u] = nc
                dx[u] = nx
                pred_val[n_pred] = v
                pred_nxt[n_pred] = -1
                head[u] = n_pred
                n_pred += 1
                heap_push(ht, hc, hx, hn, &heap_size, nt, nc, nx, u)

    pred_ptr_arr = np.zeros(n_exp + 1, np.int32)
    cdef int[::1] pred_ptr = pred_ptr_arr
    cdef int total = 0
    cdef int cur
    for v in range(n_exp):
        cur = head[v]
        while cur != -1:
            total += 1
            cur = pred_nxt[cur]
        pred_ptr[v + 1] = total
    pred_flat_arr = np.empty(total, np.int32)
    cdef int[::1] pred_flat = pred_flat_arr
    cdef int slot
    for v in range(n_exp):
        slot = pred_ptr[v]
        cur = head[v]
        while cur != -1:
            pred_flat[slot] = pred_val[cur]
            slot += 1
            cur = pred_nxt[cur]

    free(ht); free(hc); free(hx); free(hn); free(pred_val); free(pred_nxt)
    return dt_arr, dc_arr, dx_arr, pred_ptr_arr, pred_flat_arr


def first_loopless(int n_stations, int origin, int[::1] exp_station,
                   int[::1] st_ptr, int[::1] st_exp,
                   double[::1] dist_time, int[::1] dist_tc, double[::1] dist_tt,
                   int[::1] pred_ptr, int[::1] pred_flat, int budget):
    cdef int n_exp = exp_station.shape[0]

    out_t_arr = np.full(n_stations, np.inf, np.float64)
    out_c_arr = np.zeros(n_stations, np.int32)
    out_x_arr = np.zeros(n_stations, np.float64)
    status_arr = np.zeros(n_stations, np.uint8)
    stamped_arr = np.zeros(n_stations, np.uint8)
    cdef double[::1] out_t = out_t_arr
    cdef int[::1] out_c = out_c_arr
    cdef double[::1] out_x = out_x_arr
    cdef unsigned char[::1] status = status_arr
    cdef unsigned char[::1] stamped = stamped_arr

    cdef int* stack_node = <int*> malloc((n_exp + 2) * sizeof(int))
    cdef int* stack_cursor = <int*> malloc((n_exp + 2) * sizeof(int))
    cdef int* stack_mark = <int*> malloc((n_exp + 2) * sizeof(int))
    if stack_node == NULL or stack_cursor == NULL or stack_mark == NULL:
        free(stack_node); free(stack_cursor); free(stack_mark)
        raise MemoryError()

    cdef int d, i, v, s0, u, su, node, cursor, depth, steps, si
    cdef double best_t, tv
    cdef int best_c
    cdef double best_x
    cdef bint found, over_budget, better
    cdef double INF = np.inf

    with nogil:
        for d in range(n_stations):
            if d == origin:
                out_t[d] = 0.0
                status[d] = 1
                continue
            best_t = INF
            best_c = 0
            best_x = 0.0
            for i in range(st_ptr[d], st_ptr[d + 1]):
                v = st_exp[i]
                tv = dist_time[v]
                if tv == INF:
                    continue
                better = False
                if tv < best_t:
                    better = True
                elif tv == best_t:
                    if dist_tc[v] < best_c:
                        better = True
                    elif dist_tc[v] == best_c and dist_tt[v] < best_x:
                        better = True
                if better:
                    best_t = tv
                    best_c = dist_tc[v]
                    best_x = dist_tt[v]
            if best_t == INF:
                continue

            found = False
            over_budget = False
            steps = 0
            stamped[d] = 1
            for i in range(st_ptr[d], st_ptr[d + 1]):
                s0 = st_exp[i]
                if dist_time[s0] != best_t or dist_tc[s0] != best_c or dist_tt[s0] != best_x:
                    continue
                depth = 0
                stack_node[0] = s0
                stack_cursor[0] = pred_ptr[s0]
                stack_mark[0] = -1
                while depth >= 0:
                    node = stack_node[depth]
                    if exp_station[node] == origin:
                        found = True
                        break
                    cursor = stack_cursor[depth]
                    if cursor >= pred_ptr[node + 1]:
                        if stack_mark[depth] >= 0:
                            stamped[stack_mark[depth]] = 0
                        depth -= 1
                        continue
                    stack_cursor[depth] = cursor + 1
                    u = pred_flat[cursor]
                    su = exp_station[u]
                    steps += 1
                    if steps > budget:
                        over_budget = True
                        break
                    if su == exp_station[node]:
                        depth += 1
                        stack_node[depth] = u
                        stack_cursor[depth] = pred_ptr[u]
                        stack_mark[depth] = -1
                    elif stamped[su] == 0:
                        stamped[su] = 1
                        depth += 1
                        stack_node[depth] = u
                        stack_cursor[depth] = pred_ptr[u]
                        stack_mark[depth] = su
                while depth >= 0:
                    if stack_mark[depth] >= 0:
                        stamped[stack_mark[depth]] = 0
                    depth -= 1
                if found or over_budget:
                    break
            stamped[d] = 0

            if found:
                out_t[d] = best_t
                out_c[d] = best_c
                out_x[d] = best_x
                status[d] = 1
            else:
                status[d] = 2

    free(stack_node); free(stack_cursor); free(stack_mark)
    return out_t_arr, out_c_arr, out_x_arr, status_arr
