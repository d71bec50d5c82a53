"""Exact competitive-ratio arithmetic for b-matching on (k,d)-graphs.

Everything here works over :class:`fractions.Fraction`; no floating point
enters a correctness path.  The central quantity is the optimal
deterministic ratio

    c*(k, d, b) = 1 - (1/b) * S(kb, b) * (1 - 1/d)^(kb),
    S(n, m)     = sum_{i=1..m} i * C(n, m - i) / (d - 1)^(m - i),

and the adversary deficiency ``F(x, l, delta)`` (empty capacity that an
adaptive adversary forces on ``x`` servers starting at load ``l`` and
degree ``delta``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable

from .errors import BoundViolation, ParameterError, PoleError

__all__ = [
    "Params",
    "competitive_ratio",
    "min_competitive_ratio",
    "weighted_binomial_sum",
    "deficiency_closed",
    "deficiency_recursive",
    "deficiency_bound",
    "pochhammer",
    "gauss_2f1_poly",
    "monotonicity_scan",
    "convergence_gap",
]


@dataclass(frozen=True)
class Params:
    """Problem parameters: demand factor ``k``, request degree bound ``d``,
    uniform server capacity ``b``."""

    k: int
    d: int
    b: int

    def __post_init__(self) -> None:
        for name in ("k", "d", "b"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.d < 2:
            raise ParameterError(
                f"d must be >= 2, got {self.d} (for d = 1 greedy is optimal and the ratio is 1)"
            )
        if self.b < 1:
            raise ParameterError(f"b must be >= 1, got {self.b}")

    @property
    def kb(self) -> int:
        return self.k * self.b

    @property
    def tight_regime(self) -> bool:
        """True when k >= d, the regime where c* is provably optimal."""
        return self.k >= self.d


def weighted_binomial_sum(n: int, m: int, d: int) -> Fraction:
    """``sum_{i=1..m} i * C(n, m-i) / (d-1)^(m-i)``; zero for ``m <= 0``."""
    if m <= 0:
        return Fraction(0)
    # Common denominator (d-1)^(m-1) keeps the loop in integers.
    base = d - 1
    num = 0
    for i in range(1, m + 1):
        num += i * comb(n, m - i) * base ** (i - 1)
    return Fraction(num, base ** (m - 1))


def _check_d(d: int) -> None:
    if d < 2:
        raise ParameterError(f"ratio formula needs d >= 2, got d={d}; treat d=1 as ratio 1")


def competitive_ratio(p: Params) -> Fraction:
    """Optimal deterministic competitive ratio c* for uniform capacity ``p.b``.

    >>> competitive_ratio(Params(2, 2, 4))
    Fraction(221, 256)
    """
    _check_d(p.d)
    tail = Fraction(p.d - 1, p.d) ** p.kb
    return 1 - weighted_binomial_sum(p.kb, p.b, p.d) * tail / p.b


def min_competitive_ratio(k: int, d: int, capacities: Iterable[int]) -> Fraction:
    """Minimum of c* over the distinct capacities present."""
    distinct = sorted(set(capacities))
    if not distinct:
        raise ParameterError("capacities must be nonempty")
    return min(competitive_ratio(Params(k, d, b)) for b in distinct)


def _check_state(l: int, delta: int, p: Params) -> None:
    if not 0 <= l <= p.b:
        raise ParameterError(f"load l={l} outside 0..{p.b}")
    if not l <= delta <= p.kb:
        raise ParameterError(f"degree delta={delta} outside {l}..{p.kb}")


def deficiency_closed(x: Fraction | int, l: int, delta: int, p: Params) -> Fraction:
    """Closed-form deficiency ``F(x, l, delta)``."""
    _check_state(l, delta, p)
    rest = p.kb - delta
    return (
        Fraction(x)
        * Fraction(p.d - 1, p.d) ** rest
        * weighted_binomial_sum(rest, p.b - l, p.d)
    )


def deficiency_recursive(x: Fraction | int, l: int, delta: int, p: Params) -> Fraction:
    """Deficiency evaluated by unrolling the round-by-round recurrence.

    Base cases: ``F(x, b, delta) = 0`` and ``F(x, l, kb) = x (b - l)``.
    Otherwise the ``x`` servers go through ``kb - delta`` rounds; a ``1/d``
    share of the survivors is matched in each round and recursed on with
    load ``l + 1``, the rest end at degree ``kb`` with load ``l``.
    The recursion is memoised on the unit-``x`` value (F is linear in x).
    """
    _check_state(l, delta, p)
    return Fraction(x) * _unit_deficiency(p.k, p.d, p.b, l, delta)


@lru_cache(maxsize=None)
def _unit_deficiency(k: int, d: int, b: int, l: int, delta: int) -> Fraction:
    kb = k * b
    if l == b:
        return Fraction(0)
    if delta == kb:
        return Fraction(b - l)
    stay = Fraction(d - 1, d)
    total = stay ** (kb - delta) * (b - l)
    for i in range(1, kb - delta + 1):
        share = Fraction(1, d) * stay ** (i - 1)
        total += share * _unit_deficiency(k, d, b, l + 1, delta + i)
    return total


def deficiency_bound(p: Params) -> Fraction:
    """Upper bound ``C(kb, b-1) (1-1/d)^(kb) / (d-1)^(b-1)`` on ``1 - c*``."""
    _check_d(p.d)
    return (
        Fraction(comb(p.kb, p.b - 1), (p.d - 1) ** (p.b - 1))
        * Fraction(p.d - 1, p.d) ** p.kb
    )


def pochhammer(x: Fraction | int, n: int) -> Fraction:
    """Rising factorial ``x (x+1) ... (x+n-1)``."""
    x = Fraction(x)
    out = Fraction(1)
    for i in range(n):
        out *= x + i
    return out


def gauss_2f1_poly(
    m: int, gamma: Fraction | int, z: Fraction | int, alpha: Fraction | int = 2
) -> Fraction:
    """Terminating Gauss series ``2F1(alpha, -m; gamma; z)``.

    Sums ``(-1)^n C(m, n) (alpha)_n / (gamma)_n z^n`` for n = 0..m.
    Raises :class:`PoleError` if some ``(gamma)_n`` with n <= m is zero.
    """
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    alpha, gamma, z = Fraction(alpha), Fraction(gamma), Fraction(z)
    total = Fraction(0)
    term_num = Fraction(1)  # (alpha)_n z^n
    term_den = Fraction(1)  # (gamma)_n
    for n in range(m + 1):
        if term_den == 0:
            raise PoleError(f"(gamma)_{n} vanishes for gamma={gamma}")
        total += (-1) ** n * comb(m, n) * term_num / term_den
        term_num *= (alpha + n) * z
        term_den *= gamma + n
    return total


def _require_tight(k: int, d: int) -> None:
    if d < 2 or k < d:
        raise ParameterError(f"need k >= d >= 2, got k={k}, d={d}")


def monotonicity_scan(k: int, d: int, b_max: int) -> tuple[list[tuple[int, Fraction]], bool]:
    """c* for b = 1..b_max and whether the sequence is strictly increasing."""
    _require_tight(k, d)
    if b_max < 1:
        raise ParameterError(f"b_max must be >= 1, got {b_max}")
    seq = [(b, competitive_ratio(Params(k, d, b))) for b in range(1, b_max + 1)]
    strict = all(prev[1] < cur[1] for prev, cur in zip(seq, seq[1:]))
    return seq, strict


def convergence_gap(p: Params) -> Fraction:
    """``1 - c*``, checked against :func:`deficiency_bound`."""
    _require_tight(p.k, p.d)
    gap = 1 - competitive_ratio(p)
    bound = deficiency_bound(p)
    if gap > bound:
        raise BoundViolation(f"1 - c* = {gap} exceeds bound {bound} at {p}")
    return gap
