import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from support import config, random_element
from tiltphi.errors import ConfigMismatch, GridError, NoRootError, NotAUnit, ParseError
from tiltphi.tilt import (
    AtLeastP,
    TiltElement,
    format_element,
    parse_element,
    t_add,
    t_dpow,
    t_frobenius,
    t_frobenius_inv,
    t_invert_unit,
    t_mul,
    t_root_unit,
    t_val,
)

CONFIG_POINTS = [(2, 1, 1, 8), (2, 2, 3, 6), (3, 1, 2, 5), (3, 2, 1, 4), (5, 1, 4, 3)]


def test_monomial_products():
    c = config(2, D=2)
    h = t_dpow(Fraction(1, 2), c)
    assert t_mul(h, h) == t_dpow(1, c)
    x = parse_element("1 + g*d^{3/2}" if c.field.m > 1 else "1 + d^{3/2}", c)
    assert t_add(x, TiltElement.zero(c)) == x


def test_square_in_char_two():
    c = config(2)
    one_d = parse_element("1 + d", c)
    assert one_d * one_d == parse_element("1 + d^{2}", c)


def test_truncation_drops_high_terms():
    c = config(3, P=2)
    d = t_dpow(1, c)
    assert (d * d).is_zero()
    assert t_val(d * d) == AtLeastP(Fraction(2))


def test_valuation_examples():
    c = config(2, D=6)
    assert t_val(t_dpow(Fraction(5, 2), c)) == Fraction(5, 2)
    assert t_val(TiltElement.zero(c)) == AtLeastP(c.P)
    assert repr(t_val(TiltElement.zero(c))) == ">=8"
    assert t_val(parse_element("1 + d^{1/3}", c)) == 0


def test_frobenius_examples():
    c = config(2, m=2, D=3)
    g = c.field.gen
    x = TiltElement.monomial(c, g, Fraction(1, 3))
    assert t_frobenius(x) == TiltElement.monomial(c, g * g, Fraction(2, 3))
    c2 = config(3, D=2)
    assert t_frobenius(t_dpow(Fraction(1, 2), c2)) == t_dpow(Fraction(3, 2), c2)
    with pytest.raises(GridError):
        t_frobenius_inv(t_dpow(1, config(2)))


def test_invert_unit_examples():
    c = config(2, P=4)
    assert t_invert_unit(TiltElement.one(c)) == TiltElement.one(c)
    assert t_invert_unit(parse_element("1 + d", c)) == parse_element("1 + d + d^{2} + d^{3}", c)
    with pytest.raises(NotAUnit):
        t_invert_unit(t_dpow(1, c))


def test_root_unit_examples():
    c = config(3, P=4)
    assert t_root_unit(TiltElement.one(c), 2) == TiltElement.one(c)
    x = parse_element("1 + d", c)
    y = t_root_unit(x, 2)
    assert y * y == x
    with pytest.raises(NoRootError) as info:
        t_root_unit(TiltElement.constant(c, 2), 2)
    assert info.value.extension_degree == 2
    with pytest.raises(ValueError):
        t_root_unit(x, 3)


def test_dpow_bounds():
    c = config(2, D=2)
    assert t_dpow(0, c) == TiltElement.one(c)
    with pytest.raises(GridError):
        t_dpow(Fraction(1, 3), c)
    with pytest.raises(GridError):
        t_dpow(8, c)


def test_config_validation():
    with pytest.raises(GridError):
        config(2, D=2, P=Fraction(1, 3))
    with pytest.raises(ValueError):
        config(2, P=0)


def test_config_mismatch():
    with pytest.raises(ConfigMismatch):
        _ = TiltElement.one(config(2)) + TiltElement.one(config(3))


def test_text_round_trip_examples():
    c = config(2, m=2, D=2)
    text = "(g+1)*d^{1/2} + 1*d^{2}"
    x = parse_element(text, c)
    assert format_element(x) == text
    assert format_element(TiltElement.zero(c)) == "0"
    assert parse_element("d", c) == t_dpow(1, c)
    with pytest.raises(ParseError):
        parse_element("1*d^{1/3}", c)
    with pytest.raises(ParseError):
        parse_element("1 + + d", c)


# -- properties -------------------------------------------------------------

def _pairs(seed, point, n=30):
    p, m, D, P = point
    c = config(p, m, D, P)
    rng = random.Random(seed)
    return c, [(random_element(rng, c, 3), random_element(rng, c, 3)) for _ in range(n)]


@given(st.integers(0, 10**6), st.sampled_from(CONFIG_POINTS))
def test_valuation_multiplicative(seed, point):
    c, pairs = _pairs(seed, point)
    for x, y in pairs:
        vx, vy = x.val(), y.val()
        if isinstance(vx, AtLeastP) or isinstance(vy, AtLeastP) or vx + vy >= c.P:
            continue
        assert (x * y).val() == vx + vy


@given(st.integers(0, 10**6), st.sampled_from(CONFIG_POINTS))
def test_frobenius_is_ring_homomorphism(seed, point):
    _, pairs = _pairs(seed, point)
    for x, y in pairs:
        assert (x + y).frobenius() == x.frobenius() + y.frobenius()
        assert (x * y).frobenius() == x.frobenius() * y.frobenius()


@given(st.integers(0, 10**6), st.sampled_from(CONFIG_POINTS))
def test_frobenius_inverse_on_low_support(seed, point):
    c, pairs = _pairs(seed, point)
    for x, _ in pairs:
        low = TiltElement(c, {k: v for k, v in x.terms.items() if k * c.p < c.Pn})
        assert low.frobenius().frobenius_inv() == low


@pytest.mark.parametrize("point", CONFIG_POINTS)
def test_invert_unit_random(point):
    p, m, D, P = point
    c = config(p, m, D, P)
    rng = random.Random(hash(point) & 0xFFFF)
    for _ in range(200):
        x = random_element(rng, c, 3, unit=True)
        assert x * x.invert_unit() == TiltElement.one(c)


@given(st.integers(0, 10**6), st.sampled_from([(3, 1, 1, 4), (5, 1, 2, 3), (3, 2, 1, 3), (2, 2, 1, 6)]),
       st.sampled_from([2, 3, 4]))
def test_root_unit_power(seed, point, n):
    p, m, D, P = point
    if n % p == 0:
        return
    c = config(p, m, D, P)
    rng = random.Random(seed)
    x = random_element(rng, c, 2, unit=True)
    try:
        y = x.root_unit(n)
    except NoRootError:
        return
    assert y**n == x


@given(st.integers(0, 10**6), st.sampled_from(CONFIG_POINTS))
def test_print_parse_round_trip(seed, point):
    c, pairs = _pairs(seed, point, 10)
    for x, _ in pairs:
        assert parse_element(format_element(x), c) == x
