"""Pure-Python Dinic maximum flow (fallback for the compiled kernel)."""

from __future__ import annotations

from collections import deque
from typing import Sequence


def max_flow(
    n: int,
    tails: Sequence[int],
    heads: Sequence[int],
    caps: Sequence[int],
    source: int,
    sink: int,
) -> tuple[int, list[int]]:
    """Maximum ``source``-``sink`` flow on arcs ``tails[i] -> heads[i]``.

    Returns the flow value and the flow on each input arc.
    """
    m = len(tails)
    if source == sink:
        return 0, [0] * m
    # Arc 2i is the forward copy of input arc i, 2i+1 its residual twin.
    to = [0] * (2 * m)
    res = [0] * (2 * m)
    count = [0] * (n + 1)
    for i in range(m):
        u, v = tails[i], heads[i]
        to[2 * i], to[2 * i + 1] = v, u
        res[2 * i] = caps[i]
        count[u + 1] += 1
        count[v + 1] += 1
    for u in range(n):
        count[u + 1] += count[u]
    start = count[:]
    adj = [0] * (2 * m)
    fill = count[:n]
    for a in range(2 * m):
        u = to[a ^ 1]
        adj[fill[u]] = a
        fill[u] += 1

    total = 0
    level = [-1] * n
    while True:
        for u in range(n):
            level[u] = -1
        level[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for idx in range(start[u], start[u + 1]):
                a = adj[idx]
                v = to[a]
                if res[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[sink] < 0:
            break

        it = start[:n]
        path: list[int] = []
        u = source
        while True:
            if u == sink:
                push = min(res[a] for a in path)
                for a in path:
                    res[a] -= push
                    res[a ^ 1] += push
                total += push
                path.clear()
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
                path.append(a)
                u = to[a]
                continue
            if u == source:
                break
            # Dead end: prune u and retreat one arc.
            level[u] = -1
            a = path.pop()
            u = to[a ^ 1]
            it[u] += 1
    flows = [caps[i] - res[2 * i] for i in range(m)]
    return total, flows
