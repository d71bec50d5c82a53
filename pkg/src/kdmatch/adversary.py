"""Adaptive adversary forcing empty capacity on any deterministic matcher.

The adversary starts with ``N = scale * d^(kb)`` servers of capacity ``b``
at load 0 and degree 0.  A group of servers sharing ``(l, delta)`` is
played for ``kb - delta`` rounds: each round the still-unmatched members
are cut into blocks of ``d`` (in id order) and one request is sent to
each block.  The servers hit in round ``j`` form a child group at
``(l + 1, delta + j + 1)``.  Groups that reach full load before degree
``kb`` are topped up with degree-1 requests.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .engine import Decision, Matcher, Policy, make_policy
from .errors import ParameterError
from .instance import Instance, RequestArrival, Server, validate_kd_graph
from .offline import max_b_matching
from .ratio import Params, competitive_ratio, deficiency_closed

__all__ = [
    "AdversaryGroup",
    "GroupRecord",
    "AdversaryTranscript",
    "TranscriptReport",
    "run_adversary",
    "run_adversary_variable",
    "verify_transcript",
]


@dataclass
class AdversaryGroup:
    servers: list[int]
    load: int
    degree: int


@dataclass(frozen=True)
class GroupRecord:
    """Outcome of playing one group: who stayed and which children formed."""

    size: int
    load: int
    degree: int
    survivors: int
    children: tuple[tuple[int, int, int], ...]  # (size, load, degree)


@dataclass
class AdversaryTranscript:
    params: Params
    policy: str
    scale: int
    instance: Instance
    decisions: list[Decision]
    empty_capacity: int
    forced_deficiency: int
    groups: list[GroupRecord] = field(default_factory=list)
    base_servers: int = 0
    slack: int = 0
    c_min: Fraction | None = None

    @property
    def matched(self) -> int:
        return sum(dec.server is not None for dec in self.decisions)


class _Stream:
    """Builds the instance while feeding each request to the matcher."""

    def __init__(self, matcher: Matcher):
        self.matcher = matcher
        self.arrivals: list[RequestArrival] = []

    def emit(self, neighbors: tuple[int, ...]) -> Decision:
        arrival = RequestArrival(len(self.arrivals), neighbors)
        self.arrivals.append(arrival)
        return self.matcher.on_arrival(arrival)[0]


def _require_regime(k: int, d: int) -> None:
    if d < 2 or k < d:
        raise ParameterError(
            f"adversary requires k >= d >= 2 (bound unproven otherwise), got k={k}, d={d}"
        )


def _play(p: Params, server_ids: list[int], stream: _Stream) -> tuple[list[GroupRecord], int]:
    """Run the recursive construction; returns group records and the
    deficiency the adversary accounts for (assumed loads)."""
    b, d, kb = p.b, p.d, p.kb
    records = []
    forced = 0
    work = deque([AdversaryGroup(list(server_ids), 0, 0)])
    while work:
        g = work.popleft()
        if g.load == b:
            for s in g.servers:
                for _ in range(kb - g.degree):
                    stream.emit((s,))
            continue
        if g.degree == kb:
            forced += len(g.servers) * (b - g.load)
            continue
        block_count = d ** (kb - g.degree)
        if len(g.servers) % block_count:
            raise AssertionError(
                f"group of {len(g.servers)} at degree {g.degree} not divisible by {block_count}"
            )
        survivors = list(g.servers)
        children = []
        for j in range(kb - g.degree):
            hit = []
            for lo in range(0, len(survivors), d):
                block = tuple(survivors[lo:lo + d])
                dec = stream.emit(block)
                # A declined request is charged to the lowest-id neighbour.
                hit.append(dec.server if dec.server is not None else block[0])
            gone = set(hit)
            survivors = [s for s in survivors if s not in gone]
            child = AdversaryGroup(sorted(hit), g.load + 1, g.degree + j + 1)
            children.append(child)
            work.append(child)
        forced += len(survivors) * (b - g.load)
        records.append(
            GroupRecord(
                len(g.servers),
                g.load,
                g.degree,
                len(survivors),
                tuple((len(c.servers), c.load, c.degree) for c in children),
            )
        )
    return records, forced


def _as_policy(policy: Policy | str) -> Policy:
    return make_policy(policy) if isinstance(policy, str) else policy


def _meta(policy: Policy) -> dict:
    return {
        "generator": "adversary",
        "policy": policy.name,
        "note": "arrival order adapted to this policy; replays against other policies are not adversarial",
    }


def run_adversary(p: Params, policy: Policy | str, scale: int = 1) -> AdversaryTranscript:
    """Play the adversary against ``policy`` with ``scale * d^(kb)`` servers."""
    _require_regime(p.k, p.d)
    if scale < 1:
        raise ParameterError(f"scale must be >= 1, got {scale}")
    policy = _as_policy(policy)
    n = scale * p.d ** p.kb
    servers = [Server(i, p.b) for i in range(n)]
    matcher = Matcher(p.k, p.d, servers, policy)
    stream = _Stream(matcher)
    records, forced = _play(p, list(range(n)), stream)
    inst = Instance(p.k, p.d, servers, stream.arrivals, _meta(policy))
    matched = sum(dec.server is not None for dec in matcher.decisions)
    return AdversaryTranscript(
        params=p,
        policy=policy.name,
        scale=scale,
        instance=inst,
        decisions=matcher.decisions,
        empty_capacity=inst.total_capacity - matched,
        forced_deficiency=forced,
        groups=records,
        base_servers=n,
        c_min=competitive_ratio(p),
    )


def run_adversary_variable(
    k: int, d: int, capacities: Iterable[int], policy: Policy | str, scale: int = 1
) -> AdversaryTranscript:
    """Adversary for mixed capacities.

    The full construction runs on the capacity ``b'`` with the smallest c*;
    every other capacity gets a single server padded with private degree-1
    requests.  Those extra servers add ``slack = sum(other capacities)`` to
    what any algorithm can match, which the transcript reports.
    """
    _require_regime(k, d)
    caps = sorted(set(capacities))
    if not caps:
        raise ParameterError("capacities must be nonempty")
    ratios = {b: competitive_ratio(Params(k, d, b)) for b in caps}
    base = min(caps, key=lambda b: (ratios[b], b))
    p = Params(k, d, base)
    policy = _as_policy(policy)
    n = scale * d ** p.kb
    others = [b for b in caps if b != base]
    servers = [Server(i, base) for i in range(n)]
    servers += [Server(n + j, b) for j, b in enumerate(others)]
    matcher = Matcher(k, d, servers, policy)
    stream = _Stream(matcher)
    records, forced = _play(p, list(range(n)), stream)
    for j, b in enumerate(others):
        for _ in range(k * b):
            stream.emit((n + j,))
    inst = Instance(k, d, servers, stream.arrivals, _meta(policy))
    matched = sum(dec.server is not None for dec in matcher.decisions)
    return AdversaryTranscript(
        params=p,
        policy=policy.name,
        scale=scale,
        instance=inst,
        decisions=matcher.decisions,
        empty_capacity=inst.total_capacity - matched,
        forced_deficiency=forced,
        groups=records,
        base_servers=n,
        slack=sum(others),
        c_min=ratios[base],
    )


@dataclass
class TranscriptReport:
    empty_capacity: int
    deficiency: Fraction
    opt: int
    valid: bool
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_transcript(t: AdversaryTranscript, p: Params | None = None) -> TranscriptReport:
    """Recheck a transcript from its emitted instance and decisions."""
    p = p or t.params
    inst = t.instance
    failures = []
    loads = [0] * len(inst.servers)
    for dec in t.decisions:
        if dec.server is not None:
            loads[dec.server] += 1
    over = [s.id for s in inst.servers if loads[s.id] > s.capacity]
    if over:
        failures.append(f"servers over capacity: {over[:10]}")
    empty = sum(s.capacity - loads[s.id] for s in inst.servers)
    bound = deficiency_closed(t.base_servers, 0, 0, p)
    if empty != t.empty_capacity:
        failures.append(f"recorded empty capacity {t.empty_capacity} != recomputed {empty}")
    if empty < bound:
        failures.append(f"empty capacity {empty} < forced deficiency {bound}")
    report = validate_kd_graph(inst)
    if not report.is_kd_graph:
        failures.append(
            f"not a (k,d)-graph: {len(report.offending_servers)} low-degree servers, "
            f"{len(report.offending_requests)} high-degree requests"
        )
    opt = max_b_matching(inst)
    if opt != inst.total_capacity:
        failures.append(f"OPT = {opt} but total capacity is {inst.total_capacity}")
    return TranscriptReport(empty, bound, opt, report.is_kd_graph, failures)
