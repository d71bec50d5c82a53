"""Bipartite instances, online arrival order, (k,d)-validation and JSON I/O."""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import InstanceFormatError, ParameterError
from .ratio import Params

__all__ = [
    "Server",
    "RequestArrival",
    "Instance",
    "ValidationReport",
    "structural_errors",
    "validate_kd_graph",
    "random_instance",
    "read_instance",
    "write_instance",
    "instance_to_dict",
    "instance_from_dict",
    "format_rational",
    "parse_rational",
]


@dataclass(frozen=True)
class Server:
    id: int
    capacity: int
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class RequestArrival:
    id: int
    neighbors: tuple[int, ...]


@dataclass
class Instance:
    k: int
    d: int
    servers: list[Server]
    arrivals: list[RequestArrival]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def capacities(self) -> list[int]:
        return [s.capacity for s in self.servers]

    @property
    def total_capacity(self) -> int:
        return sum(s.capacity for s in self.servers)

    def degrees(self) -> list[int]:
        deg = [0] * len(self.servers)
        for arrival in self.arrivals:
            for s in arrival.neighbors:
                if 0 <= s < len(deg):
                    deg[s] += 1
        return deg


@dataclass
class ValidationReport:
    is_kd_graph: bool
    offending_servers: list[int]
    offending_requests: list[int]
    structural: list[str] = field(default_factory=list)


def format_rational(q: Fraction | int) -> str:
    """Always ``num/den``, including integers (``"884/1"``)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str | int) -> Fraction:
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    return Fraction(text.strip())


def structural_errors(inst: Instance) -> list[str]:
    """Id density, uniqueness, capacity/weight sign and neighbour validity."""
    errors = []
    n = len(inst.servers)
    for pos, s in enumerate(inst.servers):
        if s.id != pos:
            errors.append(f"server at position {pos} has id {s.id}; ids must be dense 0..{n - 1}")
        if s.capacity < 1:
            errors.append(f"server {s.id}: capacity {s.capacity} < 1")
        if s.weight <= 0:
            errors.append(f"server {s.id}: weight {s.weight} must be positive")
    seen: set[int] = set()
    for a in inst.arrivals:
        if a.id in seen:
            errors.append(f"request id {a.id} repeated")
        seen.add(a.id)
        if not a.neighbors:
            errors.append(f"request {a.id}: empty neighbour list")
        if len(set(a.neighbors)) != len(a.neighbors):
            errors.append(f"request {a.id}: duplicate neighbours {list(a.neighbors)}")
        bad = [s for s in a.neighbors if not 0 <= s < n]
        if bad:
            errors.append(f"request {a.id}: unknown servers {bad}")
    return errors


def validate_kd_graph(inst: Instance) -> ValidationReport:
    """Check server degrees against ``k * b_s`` and request degrees against ``d``."""
    structural = structural_errors(inst)
    deg = inst.degrees()
    low = [s.id for s in inst.servers if 0 <= s.id < len(deg) and deg[s.id] < inst.k * s.capacity]
    high = [a.id for a in inst.arrivals if len(a.neighbors) > inst.d]
    return ValidationReport(
        is_kd_graph=not low and not high and not structural,
        offending_servers=low,
        offending_requests=high,
        structural=structural,
    )


def random_instance(
    p: Params,
    n_servers: int,
    seed: int,
    *,
    capacities: Sequence[int] | None = None,
    weights: Sequence[Fraction | int] | None = None,
) -> Instance:
    """Seeded random (k,d)-graph.

    Each arrival is adjacent to ``min(d, n_servers)`` distinct servers drawn
    uniformly; arrivals are emitted until every server reaches degree
    ``k * b_s``.  ``capacities`` / ``weights``, when given, are pools that
    each server's value is drawn from; otherwise capacity ``p.b`` and
    weight 1.
    """
    if n_servers < p.d:
        raise ParameterError(f"need n_servers >= d, got {n_servers} < {p.d}")
    rng = random.Random(seed)
    servers = []
    for i in range(n_servers):
        cap = rng.choice(list(capacities)) if capacities else p.b
        w = Fraction(rng.choice(list(weights))) if weights else Fraction(1)
        servers.append(Server(i, cap, w))
    need = [p.k * s.capacity for s in servers]
    deficient = sum(1 for x in need if x > 0)
    width = min(p.d, n_servers)
    arrivals = []
    ids = range(n_servers)
    while deficient:
        nbrs = tuple(sorted(rng.sample(ids, width)))
        for s in nbrs:
            need[s] -= 1
            if need[s] == 0:
                deficient -= 1
        arrivals.append(RequestArrival(len(arrivals), nbrs))
    return Instance(p.k, p.d, servers, arrivals)


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    out: dict[str, Any] = {
        "k": inst.k,
        "d": inst.d,
        "servers": [
            {"id": s.id, "capacity": s.capacity, "weight": format_rational(s.weight)}
            for s in inst.servers
        ],
        "arrivals": [{"id": a.id, "neighbors": list(a.neighbors)} for a in inst.arrivals],
    }
    if inst.metadata:
        out["metadata"] = inst.metadata
    return out


def _field(obj: Any, name: str, where: str, kind: type | tuple[type, ...] = int) -> Any:
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    if name not in obj:
        raise InstanceFormatError(f"{where}: missing field '{name}'")
    value = obj[name]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise InstanceFormatError(f"{where}: field '{name}' has wrong type {type(value).__name__}")
    return value


def instance_from_dict(data: Any) -> Instance:
    k = _field(data, "k", "instance")
    d = _field(data, "d", "instance")
    servers = []
    for pos, raw in enumerate(_field(data, "servers", "instance", list)):
        where = f"servers[{pos}]"
        sid = _field(raw, "id", where)
        cap = _field(raw, "capacity", where)
        weight = Fraction(1)
        if "weight" in raw:
            try:
                weight = parse_rational(raw["weight"])
            except (ValueError, ZeroDivisionError) as exc:
                raise InstanceFormatError(f"{where}: bad weight {raw['weight']!r}") from exc
        servers.append(Server(sid, cap, weight))
    arrivals = []
    for pos, raw in enumerate(_field(data, "arrivals", "instance", list)):
        where = f"arrivals[{pos}]"
        rid = _field(raw, "id", where)
        nbrs = _field(raw, "neighbors", where, list)
        if not all(isinstance(s, int) and not isinstance(s, bool) for s in nbrs):
            raise InstanceFormatError(f"{where}: neighbors must be integers")
        arrivals.append(RequestArrival(rid, tuple(nbrs)))
    inst = Instance(k, d, servers, arrivals, dict(data.get("metadata", {})))
    problems = structural_errors(inst)
    if problems:
        raise InstanceFormatError("; ".join(problems))
    return inst


def read_instance(path: str | os.PathLike) -> Instance:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return instance_from_dict(data)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def write_instance(inst: Instance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")
