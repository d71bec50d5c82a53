"""Potential table V(l, delta) driving the weighted-assignment matcher.

``V`` is defined on loads ``0 <= l <= b`` and degrees ``l <= delta <= kb``
with ``V(b, .) = 1``, ``V(., kb) = 1`` and ``V(0, 0) = 0``.  Two builders are
provided: :func:`build_table` evaluates the closed forms, and
:func:`build_table_recursive` runs the one-step recurrence row by row and
recovers both the diagonal values and c* by shooting.  They must agree
exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import ParameterError
from .ratio import Params, competitive_ratio, weighted_binomial_sum

__all__ = [
    "ValueTable",
    "Violation",
    "TableReport",
    "build_table",
    "build_table_recursive",
    "recursive_ratio",
    "get_table",
    "p_gain",
    "q_gain",
    "validate_table",
    "table_to_csv",
]

Grid = tuple[tuple[Fraction | None, ...], ...]


@dataclass(frozen=True)
class ValueTable:
    params: Params
    c_star: Fraction
    values: Grid  # values[l][delta]; None for delta < l
    diagonal: tuple[Fraction, ...]  # P_l = V(l, l) for l < b

    @property
    def saturation(self) -> Fraction:
        """``1 / (b c*)``, the per-step dual increase the table saturates."""
        return 1 / (self.params.b * self.c_star)

    def V(self, l: int, delta: int) -> Fraction:
        """Table lookup with degrees beyond ``kb`` clamped to 1."""
        b, kb = self.params.b, self.params.kb
        if not 0 <= l <= b or delta < l:
            raise ParameterError(f"(l={l}, delta={delta}) outside the table domain")
        if l == b or delta >= kb:
            return Fraction(1)
        return self.values[l][delta]

    def cells(self):
        """Yield every ``(l, delta)`` in the domain, row-major."""
        for l in range(self.params.b + 1):
            for delta in range(l, self.params.kb + 1):
                yield l, delta

    def scaled(self, factor: int) -> list[list[Fraction]]:
        """Rows multiplied by ``factor`` (for comparing against integer grids)."""
        return [
            [self.values[l][delta] * factor for delta in range(l, self.params.kb + 1)]
            for l in range(self.params.b + 1)
        ]


def _check_buildable(p: Params, c: Fraction) -> None:
    if c <= 0:
        raise ParameterError(
            f"c* = {c} <= 0 for {p}; no table exists (k < d regime)"
        )


def _closed_diagonal(p: Params, c: Fraction) -> list[Fraction]:
    b, d, kb = p.b, p.d, p.kb
    inv_bc = 1 / (b * c)
    shrink = Fraction(d - 1, d)
    diag = []
    for l in range(b):
        rhs = inv_bc * weighted_binomial_sum(kb - l, b - l, d)
        diag.append(shrink ** (kb - l) * rhs + 1 - (b - l) * inv_bc)
    return diag


def build_table(p: Params) -> ValueTable:
    """Closed-form table (diagonal from the boundary condition at ``kb``)."""
    c = competitive_ratio(p)
    _check_buildable(p, c)
    b, d, kb = p.b, p.d, p.kb
    inv_bc = 1 / (b * c)
    diag = _closed_diagonal(p, c)
    grow = Fraction(d, d - 1)
    # offsets[i] = P_i + (b - i)/(bc) - 1
    offsets = [diag[i] + (b - i) * inv_bc - 1 for i in range(b)]
    rows: list[tuple[Fraction | None, ...]] = []
    for l in range(b + 1):
        row: list[Fraction | None] = [None] * l
        for delta in range(l, kb + 1):
            if l == b:
                row.append(Fraction(1))
                continue
            acc = Fraction(0)
            for i in range(l, b):
                j = i - l
                acc += (
                    (-1) ** j
                    * Fraction(comb(delta - l, j), (d - 1) ** j)
                    * grow ** (delta - i)
                    * offsets[i]
                )
            row.append(acc + 1 - (b - l) * inv_bc)
        rows.append(tuple(row))
    return ValueTable(p, c, tuple(rows), tuple(diag))


def _sweep_rows(p: Params, inv_bc: Fraction) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Fill rows from l = b down, choosing each P_l so that V(l, kb) = 1.

    Every row is affine in its starting value, so the start is found from
    one trial run with P_l = 0 and the known slope (d/(d-1))^(kb-l).
    """
    b, d, kb = p.b, p.d, p.kb
    grow = Fraction(d, d - 1)
    rows: list[list[Fraction]] = [[Fraction(0)] * (kb + 1) for _ in range(b + 1)]
    rows[b] = [Fraction(1)] * (kb + 1)
    diag = [Fraction(0)] * b

    def run(l: int, start: Fraction) -> list[Fraction]:
        row = [Fraction(0)] * (kb + 1)
        row[l] = start
        for delta in range(l, kb):
            row[delta + 1] = grow * row[delta] + (inv_bc - rows[l + 1][delta + 1]) / (d - 1)
        return row

    for l in range(b - 1, -1, -1):
        trial = run(l, Fraction(0))
        start = (1 - trial[kb]) / grow ** (kb - l)
        rows[l] = run(l, start)
        diag[l] = start
    return rows, diag


def recursive_ratio(p: Params) -> Fraction:
    """c* recovered from the recurrence alone by requiring V(0, 0) = 0.

    The sweep is affine in ``u = 1/(bc)``; two sweeps give the root.
    """
    at0 = _sweep_rows(p, Fraction(0))[1][0]
    at1 = _sweep_rows(p, Fraction(1))[1][0]
    u = at0 / (at0 - at1)
    return 1 / (p.b * u)


def build_table_recursive(p: Params) -> ValueTable:
    """Table from the forward recurrence; independent of the closed forms."""
    c = recursive_ratio(p)
    _check_buildable(p, c)
    rows, diag = _sweep_rows(p, 1 / (p.b * c))
    grid = tuple(
        tuple([None] * l + rows[l][l:]) for l in range(p.b + 1)
    )
    return ValueTable(p, c, grid, tuple(diag))


@lru_cache(maxsize=256)
def get_table(k: int, d: int, b: int) -> ValueTable:
    """Cached closed-form table keyed by ``(k, d, b)``."""
    return build_table(Params(k, d, b))


def q_gain(t: ValueTable, l: int, delta: int) -> Fraction:
    """Increase of V when a neighbouring request goes elsewhere."""
    b, kb = t.params.b, t.params.kb
    if l >= b or delta >= kb:
        return Fraction(0)
    return t.V(l, delta + 1) - t.V(l, delta)


def p_gain(t: ValueTable, l: int, delta: int) -> Fraction:
    """Increase of V when the request is assigned to this server."""
    b, kb = t.params.b, t.params.kb
    if l >= b or delta >= kb:
        return Fraction(0)
    return t.V(l + 1, delta + 1) - t.V(l, delta)


@dataclass(frozen=True)
class Violation:
    l: int
    delta: int
    check: str
    detail: str


@dataclass
class TableReport:
    saturation: Fraction
    cells: list[tuple[int, int]] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.cells and not self.violations


def validate_table(t: ValueTable) -> TableReport:
    """Check a table against every structural invariant.

    ``cells`` lists the cells whose value differs from the exact
    construction for ``t.params``; ``violations`` lists every failed
    invariant (boundaries, range, monotonicity, saturation).  A single bad
    cell shows up once in ``cells`` and possibly several times in
    ``violations``, since its neighbours' increments change too.
    """
    p = t.params
    b, d, kb = p.b, p.d, p.kb
    report = TableReport(saturation=t.saturation)
    found = report.violations.append

    reference = build_table(p)
    for l, delta in t.cells():
        if t.values[l][delta] != reference.values[l][delta]:
            report.cells.append((l, delta))

    raw = t.values
    if raw[0][0] != 0:
        found(Violation(0, 0, "origin", f"V(0,0) = {raw[0][0]}"))
    for delta in range(b, kb + 1):
        if raw[b][delta] != 1:
            found(Violation(b, delta, "full-row", f"V(b,{delta}) = {raw[b][delta]}"))
    for l in range(b + 1):
        if raw[l][kb] != 1:
            found(Violation(l, kb, "degree-cap", f"V({l},kb) = {raw[l][kb]}"))
    for l in range(b):
        if raw[l][l] != t.diagonal[l]:
            found(Violation(l, l, "diagonal", f"V = {raw[l][l]}, P = {t.diagonal[l]}"))
    for l, delta in t.cells():
        v = raw[l][delta]
        if not 0 <= v <= 1:
            found(Violation(l, delta, "range", f"V = {v}"))
        if delta < kb and raw[l][delta + 1] < v:
            found(Violation(l, delta, "monotone", f"V decreases to {raw[l][delta + 1]}"))
    for l in range(b):
        for delta in range(l, kb):
            # Use raw cells so the check sees exactly what is stored.
            pg = raw[l + 1][delta + 1] - raw[l][delta]
            qg = raw[l][delta + 1] - raw[l][delta]
            total = pg + (d - 1) * qg
            if total != report.saturation:
                found(Violation(l, delta, "saturation", f"p + (d-1) q = {total}"))
    return report


def table_to_csv(t: ValueTable) -> str:
    """CSV dump ``l,delta,numerator,denominator,value``; exact integers."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l", "delta", "numerator", "denominator", "value"])
    for l, delta in t.cells():
        v = t.values[l][delta]
        writer.writerow([l, delta, v.numerator, v.denominator, f"{v.numerator}/{v.denominator}"])
    return buf.getvalue()
