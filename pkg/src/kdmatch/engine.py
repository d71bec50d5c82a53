"""Online matchers driven one arrival at a time.

All policies share :class:`Matcher`.  The weighted-assignment family keeps
server duals ``x(s) = V_s(l_s, delta_s)`` and audits every step against the
bound ``Delta D <= Delta P / c*_s``; the Greedy/Balance/HighDegree
baselines carry no duals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

from .errors import ConfigurationError
from .instance import Instance, RequestArrival, Server, format_rational
from .table import ValueTable, get_table

__all__ = [
    "Decision",
    "StepAudit",
    "MatcherState",
    "Policy",
    "Greedy",
    "Balance",
    "HighDegree",
    "WeightedAssignment",
    "WeightedAssignmentVC",
    "WeightedAssignmentVW",
    "POLICIES",
    "make_policy",
    "Matcher",
    "RunResult",
    "run_stream",
    "dual_invariant_errors",
    "dual_feasibility_errors",
]

TableProvider = Callable[[int, int, int], ValueTable]


@dataclass(frozen=True)
class Decision:
    request: int
    server: int | None

    @property
    def matched(self) -> bool:
        return self.server is not None


@dataclass(frozen=True)
class StepAudit:
    request: int
    delta_p: Fraction
    delta_d: Fraction
    bound: Fraction
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "request": self.request,
            "dP": format_rational(self.delta_p),
            "dD": format_rational(self.delta_d),
            "bound": format_rational(self.bound),
            "pass": self.passed,
        }


@dataclass
class MatcherState:
    capacities: list[int]
    weights: list[Fraction]
    loads: list[int]
    degrees: list[int]
    x: list[Fraction]
    y: dict[int, Fraction] = field(default_factory=dict)
    matching: dict[int, int] = field(default_factory=dict)
    P: Fraction = Fraction(0)
    D: Fraction = Fraction(0)

    @classmethod
    def fresh(cls, servers: Iterable[Server], weighted: bool) -> "MatcherState":
        servers = list(servers)
        n = len(servers)
        return cls(
            capacities=[s.capacity for s in servers],
            weights=[s.weight if weighted else Fraction(1) for s in servers],
            loads=[0] * n,
            degrees=[0] * n,
            x=[Fraction(0)] * n,
        )

    def has_room(self, s: int) -> bool:
        return self.loads[s] < self.capacities[s]


class Policy:
    """Chooses a server among the available neighbours of a request.

    ``candidates`` arrive sorted by server id; every built-in policy breaks
    ties toward the lowest id.
    """

    name = "policy"
    tracks_duals = False
    weighted = False

    def prepare(self, k: int, d: int, servers: list[Server]) -> None:
        self.k, self.d = k, d

    def choose(self, state: MatcherState, candidates: list[int]) -> int:
        raise NotImplementedError

    def c_star(self, capacity: int) -> Fraction:
        raise ConfigurationError(f"{self.name} has no ratio guarantee")

    def value(self, s: int, state: MatcherState, load: int, degree: int) -> Fraction:
        raise ConfigurationError(f"{self.name} keeps no duals")


def _argmax(candidates: list[int], key: Callable[[int], Any]) -> int:
    best, best_key = candidates[0], key(candidates[0])
    for s in candidates[1:]:
        k = key(s)
        if k > best_key:
            best, best_key = s, k
    return best


class Greedy(Policy):
    name = "greedy"

    def choose(self, state, candidates):
        return candidates[0]


class Balance(Policy):
    name = "balance"

    def choose(self, state, candidates):
        return _argmax(candidates, lambda s: -state.loads[s])


class HighDegree(Policy):
    name = "highdegree"

    def choose(self, state, candidates):
        return _argmax(candidates, lambda s: state.degrees[s])


class WeightedAssignment(Policy):
    """Match to the neighbour maximising ``V(l, delta+1) - V(l, delta)``.

    Requires uniform capacities.  For ``d = 1`` it degrades to Greedy
    (optimal there) and drops the dual bookkeeping.
    """

    name = "wa"
    uniform_only = True

    def __init__(self, tables: TableProvider = get_table):
        self._tables = tables
        self.tracks_duals = True

    def prepare(self, k, d, servers):
        super().prepare(k, d, servers)
        caps = {s.capacity for s in servers}
        if self.uniform_only and len(caps) > 1:
            raise ConfigurationError(
                f"{self.name} needs uniform capacities, got {sorted(caps)}; use wa-vc"
            )
        self.tracks_duals = d >= 2
        if self.tracks_duals:
            try:
                self._by_cap = {b: self._tables(k, d, b) for b in caps}
            except Exception as exc:
                raise ConfigurationError(f"no value table for k={k}, d={d}: {exc}") from exc

    def table(self, capacity: int) -> ValueTable:
        return self._by_cap[capacity]

    def c_star(self, capacity):
        return self._by_cap[capacity].c_star

    def value(self, s, state, load, degree):
        cap = state.capacities[s]
        return self._by_cap[cap].V(min(load, cap), degree)

    def scale(self, s: int, state: MatcherState) -> Fraction:
        return Fraction(1)

    def gain(self, s: int, state: MatcherState) -> Fraction:
        t = self._by_cap[state.capacities[s]]
        l, delta = state.loads[s], state.degrees[s]
        return self.scale(s, state) * (t.V(l, delta + 1) - t.V(l, delta))

    def choose(self, state, candidates):
        if not self.tracks_duals:
            return candidates[0]
        return _argmax(candidates, lambda s: self.gain(s, state))


class WeightedAssignmentVC(WeightedAssignment):
    """Per-capacity tables; gains scaled by ``b_s``."""

    name = "wa-vc"
    uniform_only = False

    def scale(self, s, state):
        return Fraction(state.capacities[s])


class WeightedAssignmentVW(WeightedAssignmentVC):
    """Per-capacity tables; gains scaled by ``w_s * b_s``; primal counts ``w_s``."""

    name = "wa-vw"
    weighted = True

    def scale(self, s, state):
        return state.weights[s] * state.capacities[s]


POLICIES: dict[str, Callable[[], Policy]] = {
    "greedy": Greedy,
    "balance": Balance,
    "highdegree": HighDegree,
    "wa": WeightedAssignment,
    "wa-vc": WeightedAssignmentVC,
    "wa-vw": WeightedAssignmentVW,
}


def make_policy(name: str) -> Policy:
    try:
        return POLICIES[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown policy {name!r}; choose from {', '.join(POLICIES)}"
        ) from None


class Matcher:
    """Online state machine: feed arrivals one by one with :meth:`on_arrival`."""

    def __init__(self, k: int, d: int, servers: list[Server], policy: Policy,
                 weighted: bool | None = None):
        self.policy = policy
        policy.prepare(k, d, servers)
        self.weighted = policy.weighted if weighted is None else weighted
        self.state = MatcherState.fresh(servers, self.weighted)
        self.decisions: list[Decision] = []
        self.audits: list[StepAudit] = []

    def on_arrival(self, arrival: RequestArrival) -> tuple[Decision, StepAudit | None]:
        st, pol = self.state, self.policy
        nbrs = sorted(arrival.neighbors)
        candidates = [s for s in nbrs if st.has_room(s)]
        st.y.setdefault(arrival.id, Fraction(0))

        chosen = pol.choose(st, candidates) if candidates else None
        audit = None
        if pol.tracks_duals:
            delta_d = Fraction(0)
            if chosen is not None:
                for s in candidates:
                    load = st.loads[s] + (s == chosen)
                    new_x = pol.value(s, st, load, st.degrees[s] + 1)
                    delta_d += st.weights[s] * st.capacities[s] * (new_x - st.x[s])
                    st.x[s] = new_x
        for s in nbrs:
            st.degrees[s] += 1
        delta_p = Fraction(0)
        if chosen is not None:
            st.loads[chosen] += 1
            st.matching[arrival.id] = chosen
            delta_p = st.weights[chosen]
            st.P += delta_p
        if pol.tracks_duals:
            st.D += delta_d
            if chosen is None:
                bound = Fraction(0)
                ok = delta_d == 0
            else:
                bound = delta_p / pol.c_star(st.capacities[chosen])
                ok = delta_d <= bound
            audit = StepAudit(arrival.id, delta_p, delta_d, bound, ok)
            self.audits.append(audit)
        decision = Decision(arrival.id, chosen)
        self.decisions.append(decision)
        return decision, audit


@dataclass
class RunResult:
    policy: str
    P: Fraction
    D: Fraction
    decisions: list[Decision]
    audits: list[StepAudit]
    state: MatcherState
    c_effective: Fraction | None = None

    @property
    def matched(self) -> list[tuple[int, int]]:
        return [(dec.request, dec.server) for dec in self.decisions if dec.server is not None]

    @property
    def audit_passes(self) -> int:
        return sum(a.passed for a in self.audits)

    @property
    def audits_ok(self) -> bool:
        return all(a.passed for a in self.audits)

    def to_dict(self, with_audits: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "policy": self.policy,
            "P": format_rational(self.P),
            "D": format_rational(self.D),
            "matched": [{"request": r, "server": s} for r, s in self.matched],
        }
        if with_audits:
            out["audits"] = [a.to_dict() for a in self.audits]
        return out


def run_stream(inst: Instance, policy: Policy | str, weighted: bool | None = None) -> RunResult:
    """Replay ``inst.arrivals`` in order against ``policy``."""
    if isinstance(policy, str):
        policy = make_policy(policy)
    m = Matcher(inst.k, inst.d, inst.servers, policy, weighted)
    for arrival in inst.arrivals:
        m.on_arrival(arrival)
    c_eff = None
    if policy.tracks_duals and inst.servers:
        c_eff = min(policy.c_star(b) for b in set(inst.capacities))
    st = m.state
    return RunResult(policy.name, st.P, st.D, m.decisions, m.audits, st, c_eff)


def dual_invariant_errors(inst: Instance, result: RunResult, policy: Policy) -> list[str]:
    """Servers whose stored ``x(s)`` differs from ``V_s(l_s, min(delta_s, kb_s))``."""
    st = result.state
    errs = []
    for s in range(len(st.loads)):
        cap = st.capacities[s]
        expect = policy.value(s, st, st.loads[s], min(st.degrees[s], inst.k * cap))
        if st.x[s] != expect:
            errs.append(f"server {s}: x = {st.x[s]}, V = {expect}")
    return errs


def dual_feasibility_errors(inst: Instance, result: RunResult) -> list[str]:
    """Edges violating ``w_s x(s) + y(r) >= w_s`` in the final dual."""
    st = result.state
    errs = []
    for a in inst.arrivals:
        y = st.y.get(a.id, Fraction(0))
        for s in a.neighbors:
            w = st.weights[s]
            if w * st.x[s] + y < w:
                errs.append(f"edge ({s}, {a.id}): {w}*{st.x[s]} + {y} < {w}")
    return errs
