"""Offline optimum for (vertex-weighted) b-matching via maximum flow."""

from __future__ import annotations

from fractions import Fraction

from . import flow
from .instance import Instance

__all__ = [
    "flow_network",
    "max_b_matching",
    "optimal_assignment",
    "max_weight_b_matching",
    "has_perfect_b_matching",
]


def flow_network(inst: Instance, servers: set[int] | None = None):
    """Arc lists for source -> server (b_s) -> request (1) -> sink (1).

    Node ids: 0 source, 1 sink, 2.. servers, then requests.  When
    ``servers`` is given, only those servers get a source arc.
    """
    n_s = len(inst.servers)
    tails, heads, caps = [], [], []
    for s in inst.servers:
        if servers is None or s.id in servers:
            tails.append(0)
            heads.append(2 + s.id)
            caps.append(s.capacity)
    n_src = len(tails)
    for j, a in enumerate(inst.arrivals):
        r = 2 + n_s + j
        for s in a.neighbors:
            tails.append(2 + s)
            heads.append(r)
            caps.append(1)
        tails.append(r)
        heads.append(1)
        caps.append(1)
    return 2 + n_s + len(inst.arrivals), tails, heads, caps, n_src


def max_b_matching(inst: Instance) -> int:
    """Size of a maximum b-matching."""
    n, tails, heads, caps, _ = flow_network(inst)
    return flow.max_flow(n, tails, heads, caps, 0, 1)[0]


def optimal_assignment(inst: Instance) -> dict[int, int]:
    """One maximum b-matching as ``{request id: server id}``."""
    n, tails, heads, caps, _ = flow_network(inst)
    _, flows = flow.max_flow(n, tails, heads, caps, 0, 1)
    n_s = len(inst.servers)
    out = {}
    for t, h, f in zip(tails, heads, flows):
        if f and 2 <= t < 2 + n_s and h >= 2 + n_s:
            out[inst.arrivals[h - 2 - n_s].id] = t - 2
    return out


def max_weight_b_matching(inst: Instance) -> Fraction:
    """Maximum of ``sum_s w_s * load_s`` over feasible b-matchings.

    Server loads form a polymatroid whose rank on a server subset is the
    max flow with only those source arcs open, so the greedy rule is
    exact: open weight classes in decreasing order and credit each class
    with the rank increase it brings.
    """
    by_weight: dict[Fraction, set[int]] = {}
    for s in inst.servers:
        by_weight.setdefault(s.weight, set()).add(s.id)
    opened: set[int] = set()
    prev = 0
    total = Fraction(0)
    for w in sorted(by_weight, reverse=True):
        opened |= by_weight[w]
        n, tails, heads, caps, _ = flow_network(inst, opened)
        rank = flow.max_flow(n, tails, heads, caps, 0, 1)[0]
        total += w * (rank - prev)
        prev = rank
    return total


def has_perfect_b_matching(inst: Instance) -> bool:
    """True iff some b-matching fills every server to capacity."""
    return max_b_matching(inst) == inst.total_capacity
