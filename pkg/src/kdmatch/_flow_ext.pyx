# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dinic maximum flow; same contract as ``kdmatch._flow_py``."""

from cpython.array cimport array, clone

cdef array _LONG = array("q")


cdef inline array _zeros(Py_ssize_t n):
    return clone(_LONG, n, True)


def max_flow(Py_ssize_t n, tails, heads, caps, Py_ssize_t source, Py_ssize_t sink):
    cdef Py_ssize_t m = len(tails)
    if source == sink:
        return 0, [0] * m

    cdef array a_tails = array("q", tails)
    cdef array a_heads = array("q", heads)
    cdef array a_caps = array("q", caps)
    cdef long long[:] t = a_tails
    cdef long long[:] h = a_heads
    cdef long long[:] c = a_caps

    cdef array a_to = _zeros(2 * m)
    cdef array a_res = _zeros(2 * m)
    cdef array a_start = _zeros(n + 1)
    cdef array a_adj = _zeros(2 * m)
    cdef array a_fill = _zeros(n + 1)
    cdef array a_level = _zeros(n)
    cdef array a_it = _zeros(n + 1)
    cdef array a_queue = _zeros(n)
    cdef array a_path = _zeros(n + 1)
    cdef long long[:] to = a_to
    cdef long long[:] res = a_res
    cdef long long[:] start = a_start
    cdef long long[:] adj = a_adj
    cdef long long[:] fill = a_fill
    cdef long long[:] level = a_level
    cdef long long[:] it = a_it
    cdef long long[:] queue = a_queue
    cdef long long[:] path = a_path

    cdef Py_ssize_t i, u, v, a, idx, end, qh, qt, plen
    cdef long long total = 0, push

    for i in range(m):
        u = t[i]
        v = h[i]
        to[2 * i] = v
        to[2 * i + 1] = u
        res[2 * i] = c[i]
        start[u + 1] += 1
        start[v + 1] += 1
    for u in range(n):
        start[u + 1] += start[u]
    for u in range(n):
        fill[u] = start[u]
    for a in range(2 * m):
        u = to[a ^ 1]
        adj[fill[u]] = a
        fill[u] += 1

    while True:
        for u in range(n):
            level[u] = -1
        level[source] = 0
        queue[0] = source
        qh = 0
        qt = 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for idx in range(start[u], start[u + 1]):
                a = adj[idx]
                v = to[a]
                if res[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[sink] < 0:
            break

        for u in range(n):
            it[u] = start[u]
        plen = 0
        u = source
        while True:
            if u == sink:
                push = res[path[0]]
                for i in range(1, plen):
                    if res[path[i]] < push:
                        push = res[path[i]]
                for i in range(plen):
                    res[path[i]] -= push
                    res[path[i] ^ 1] += push
                total += push
                plen = 0
                u = source
                continue
            end = start[u + 1]
            i = it[u]
            while i < end:
                a = adj[i]
                if res[a] > 0 and level[to[a]] == level[u] + 1:
                    break
                i += 1
            it[u] = i
            if i < end:
                a = adj[i]
                path[plen] = a
                plen += 1
                u = to[a]
                continue
            if u == source:
                break
            level[u] = -1
            plen -= 1
            a = path[plen]
            u = to[a ^ 1]
            it[u] += 1

    flows = [c[i] - res[2 * i] for i in range(m)]
    return total, flows
