import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import random_series
from g2wall.novikov import (INF, NovikovSeries, as_cutoff, as_fraction, exp_pos, log_unit, precise_mul,
                            unit_pow)

CUT = Fraction(5)

exps = st.fractions(min_value=0, max_value=6, max_denominator=4)
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=5)
series = st.lists(st.tuples(exps, coeffs), max_size=5).map(lambda t: NovikovSeries(tuple(t), CUT))
positive = st.lists(st.tuples(exps.filter(lambda e: e > 0), coeffs), max_size=4).map(
    lambda t: NovikovSeries(tuple(t), CUT))


def test_canonical_form_merges_and_drops():
    s = NovikovSeries(((1, 2), (Fraction(1, 2), 1), (1, -2), (7, 1)), CUT)
    assert s.terms == ((Fraction(1, 2), Fraction(1)),)
    assert s.valuation() == Fraction(1, 2)
    assert NovikovSeries.zero(CUT).valuation() == INF


def test_monomial_product_adds_exponents():
    a = NovikovSeries.monomial(3, Fraction(1, 2), CUT)
    b = NovikovSeries.monomial(Fraction(1, 3), Fraction(3, 2), CUT)
    assert a * b == NovikovSeries.monomial(1, 2, CUT)


def test_truncation_discards_high_terms():
    a = NovikovSeries.monomial(1, 3, CUT)
    assert (a * a).is_zero()


def test_parsers():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_cutoff("inf") == INF
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(ValueError):
        NovikovSeries(((-1, 1),), CUT)


def test_json_round_trip():
    rng = random.Random(1)
    for _ in range(50):
        s = random_series(rng, CUT)
        assert NovikovSeries.from_json(s.to_json()) == s


@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + NovikovSeries.zero(CUT) == a
    assert a * NovikovSeries.one(CUT) == a
    assert (a - a).is_zero()


@given(series, series)
def test_ultrametric_and_valuation(a, b):
    assert (a + b).norm() <= max(a.norm(), b.norm())
    if a.valuation() + b.valuation() < CUT:
        assert (a * b).valuation() == a.valuation() + b.valuation()


@given(positive)
def test_exp_log_inverse(a):
    assert log_unit(exp_pos(a)) == a
    u = exp_pos(a)
    assert exp_pos(log_unit(u)) == u


@given(positive, st.integers(-4, 4), st.integers(-4, 4))
def test_unit_pow_laws(a, j, k):
    u = exp_pos(a)
    assert unit_pow(u, j) * unit_pow(u, k) == unit_pow(u, j + k)
    assert unit_pow(u, -k) * unit_pow(u, k) == NovikovSeries.one(CUT)
    assert unit_pow(u, k) == exp_pos(a * k)


def test_exp_pos_rejects_valuation_zero():
    with pytest.raises(ValueError):
        exp_pos(NovikovSeries.const(1, CUT))


def test_precise_mul_keeps_sharp_precision():
    a = NovikovSeries.monomial(1, 2, Fraction(3))
    b = NovikovSeries.monomial(1, 1, Fraction(3))
    assert (a * b).cutoff == Fraction(3)
    p = precise_mul(a, b)
    assert p.cutoff == Fraction(4)
    assert p == NovikovSeries.monomial(1, 3, Fraction(4))
