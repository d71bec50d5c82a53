import dataclasses
from fractions import Fraction

import pytest

from kdmatch.errors import ParameterError
from kdmatch.ratio import Params, competitive_ratio, weighted_binomial_sum
from kdmatch.table import (
    _check_buildable,
    build_table,
    build_table_recursive,
    get_table,
    p_gain,
    q_gain,
    recursive_ratio,
    table_to_csv,
    validate_table,
)

GRID = [(k, d, b) for k in (2, 3, 4) for d in (2, 3, 4) for b in range(1, 6)]


@pytest.fixture(scope="module")
def t224():
    return build_table(Params(2, 2, 4))


def test_known_cells(t224):
    assert t224.V(1, 1) == Fraction(48, 221)
    assert t224.V(2, 2) == Fraction(101, 221)
    assert t224.V(3, 3) == Fraction(159, 221)
    assert t224.V(0, 8) == 1
    assert t224.V(4, 4) == 1


def test_scaled_grid(t224, table_224_rows):
    assert t224.scaled(221) == table_224_rows


def test_recursive_rows(table_224_rows):
    t = build_table_recursive(Params(2, 2, 4))
    assert t.scaled(221)[3] == [159, 161, 165, 173, 189, 221]
    assert t.scaled(221)[0] == [0, 16, 37, 63, 93, 125, 157, 189, 221]
    assert t.scaled(221) == table_224_rows


@pytest.mark.parametrize("k,d,b", GRID)
def test_builders_agree(k, d, b):
    p = Params(k, d, b)
    closed, rec = build_table(p), build_table_recursive(p)
    assert rec.c_star == closed.c_star
    assert rec.values == closed.values
    assert rec.diagonal == closed.diagonal


@pytest.mark.parametrize("k,d,b", [(2, 2, 1), (3, 2, 3), (4, 3, 2), (2, 4, 3)])
def test_recursive_ratio_is_independent_route(k, d, b):
    assert recursive_ratio(Params(k, d, b)) == competitive_ratio(Params(k, d, b))


@pytest.mark.parametrize("k,d,b", GRID)
def test_invariants(k, d, b):
    t = build_table(Params(k, d, b))
    kb = k * b
    assert t.V(0, 0) == 0
    assert t.diagonal[0] == 0
    for l in range(b + 1):
        assert t.V(l, kb) == 1
    for delta in range(b, kb + 1):
        assert t.V(b, delta) == 1
    for l in range(b):
        assert t.V(l, l) == t.diagonal[l]
    for l, delta in t.cells():
        assert 0 <= t.V(l, delta) <= 1
        assert q_gain(t, l, delta) >= 0


@pytest.mark.parametrize("k,d,b", GRID)
def test_saturation(k, d, b):
    t = build_table(Params(k, d, b))
    for l in range(b + 1):
        for delta in range(l, k * b + 3):
            total = p_gain(t, l, delta) + (d - 1) * q_gain(t, l, delta)
            interior = l < b and delta < k * b
            assert total == (t.saturation if interior else 0)


@pytest.mark.parametrize("k,d,b", [(2, 2, 4), (3, 2, 3), (4, 4, 2), (3, 4, 2)])
def test_diagonal_identity(k, d, b):
    p = Params(k, d, b)
    t = build_table(p)
    inv = t.saturation
    for l in range(b):
        lhs = Fraction(d, d - 1) ** (p.kb - l) * (t.diagonal[l] + (b - l) * inv - 1)
        assert lhs == inv * weighted_binomial_sum(p.kb - l, b - l, d)


def test_gains(t224):
    assert q_gain(t224, 0, 0) == Fraction(16, 221)
    assert p_gain(t224, 0, 0) == Fraction(48, 221)
    assert q_gain(t224, 1, 5) == Fraction(32, 221)
    assert q_gain(t224, 0, 1) == Fraction(21, 221)
    assert q_gain(t224, 3, 6) == Fraction(16, 221)
    assert q_gain(t224, 1, 5) > q_gain(t224, 0, 1) > q_gain(t224, 3, 6)


def test_gains_vanish_when_full_or_saturated(t224):
    for delta in range(4, 12):
        assert p_gain(t224, 4, delta) == q_gain(t224, 4, delta) == 0
    assert q_gain(t224, 2, 8) == p_gain(t224, 2, 11) == 0
    assert t224.V(1, 20) == 1


def test_lookup_outside_domain(t224):
    with pytest.raises(ParameterError):
        t224.V(3, 2)
    with pytest.raises(ParameterError):
        t224.V(5, 6)


def test_validate_clean(t224):
    report = validate_table(t224)
    assert report.ok
    assert report.saturation == Fraction(64, 221)
    assert validate_table(build_table(Params(3, 2, 2))).ok


def test_validate_locates_perturbed_cell(t224):
    rows = [list(r) for r in t224.values]
    rows[1][3] += Fraction(1, 221)
    bad = dataclasses.replace(t224, values=tuple(tuple(r) for r in rows))
    report = validate_table(bad)
    assert not report.ok
    assert report.cells == [(1, 3)]
    # the broken increments touch only the perturbed cell's neighbourhood
    assert {(v.l, v.delta) for v in report.violations} <= {(1, 3), (1, 2), (0, 2)}


def test_validate_boundary_breach(t224):
    rows = [list(r) for r in t224.values]
    rows[0][8] = Fraction(220, 221)
    report = validate_table(dataclasses.replace(t224, values=tuple(tuple(r) for r in rows)))
    assert report.cells == [(0, 8)]
    assert any(v.check == "degree-cap" for v in report.violations)


def test_cache():
    assert get_table(2, 2, 4) is get_table(2, 2, 4)


def test_non_positive_ratio_rejected():
    with pytest.raises(ParameterError):
        _check_buildable(Params(1, 9, 1), Fraction(0))


def test_csv(t224):
    lines = table_to_csv(t224).splitlines()
    assert lines[0] == "l,delta,numerator,denominator,value"
    assert "0,1,16,221,16/221" in lines
    assert len(lines) == 1 + 35
