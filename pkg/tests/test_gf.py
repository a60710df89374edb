from itertools import product

import pytest
from hypothesis import given, strategies as st

from tiltphi.errors import ConfigMismatch, NoRootError
from tiltphi.gf import (
    FieldElement,
    QuadSplit,
    embed,
    ff_frobenius,
    ff_frobenius_inv,
    ff_make,
    format_poly,
    nth_root,
    parse_poly,
    poly_roots,
    quad_split_fp,
)


def _brute_irreducible_quadratics(p):
    """Monic degree-2 polynomials over F_p without a root, in ascending coefficient order."""
    out = []
    for c1, c0 in product(range(p), repeat=2):
        if all((x * x + c1 * x + c0) % p for x in range(p)):
            out.append((c0, c1, 1))
    return out


def test_prime_field():
    F = ff_make(2)
    assert F.q == 2 and F.m == 1


@pytest.mark.parametrize("p", [2, 3, 5])
def test_default_modulus_is_smallest_irreducible(p):
    # compare the non-leading coefficients from the top degree down
    expected = min(_brute_irreducible_quadratics(p), key=lambda f: (f[1], f[0]))
    assert ff_make(p, 2).modulus == expected


def test_default_moduli_values():
    assert format_poly(ff_make(2, 2).modulus) == "x^2+x+1"
    assert format_poly(ff_make(2, 3).modulus) == "x^3+x+1"
    assert format_poly(ff_make(3, 2).modulus) == "x^2+1"


def test_bad_inputs():
    with pytest.raises(ValueError):
        ff_make(4)
    with pytest.raises(ValueError):
        ff_make(2, 2, "x^2+1")  # (x+1)^2
    with pytest.raises(ValueError):
        ff_make(2, 3, "x^2+x+1")


def test_explicit_modulus_text_orders():
    assert ff_make(2, 2, "x^2+x+1") == ff_make(2, 2, "1+x+x^2")


def test_frobenius_f4_generator():
    F = ff_make(2, 2)
    g = F.gen
    assert ff_frobenius(g) == g + F.one
    assert g * g == g + 1


def test_frobenius_identity_on_prime_field():
    F = ff_make(5)
    assert all(ff_frobenius(x) == x for x in F.elements())
    assert ff_frobenius(F.zero) == F.zero


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (3, 2), (5, 2), (2, 4)])
def test_frobenius_is_automorphism(p, m):
    F = ff_make(p, m)
    els = F.elements()
    for x in els[:16]:
        for y in els[:16]:
            assert ff_frobenius(x + y) == ff_frobenius(x) + ff_frobenius(y)
            assert ff_frobenius(x * y) == ff_frobenius(x) * ff_frobenius(y)
    for x in els:
        y = x
        for _ in range(m):
            y = ff_frobenius(y)
        assert y == x
        assert ff_frobenius_inv(ff_frobenius(x)) == x


def test_field_axioms_sample():
    F = ff_make(3, 2)
    for x in F.elements():
        if x:
            assert x * (F.one / x) == F.one
        assert x - x == F.zero


def test_cross_field_arithmetic_refused():
    with pytest.raises(ConfigMismatch):
        _ = ff_make(2, 2).gen + ff_make(2, 3).gen


def test_poly_roots_examples():
    F3 = ff_make(3)
    assert {r.code for r in poly_roots([-1, 0, 1], F3)} == {1, 2}
    assert poly_roots([1, 1, 1], ff_make(2)) == frozenset()
    F4 = ff_make(2, 2)
    brute = {x.code for x in F4.elements() if (x * x * x - x) == F4.zero}
    got = {r.code for r in poly_roots([0, -1, 0, 1], F4)}
    assert got == brute == {0, 1}
    with pytest.raises(ValueError):
        poly_roots([0], F3)


def test_poly_roots_large_field_uses_splitting():
    F = ff_make(2, 17)
    x = F.gen
    # (X - x)(X - x^2) expanded
    f = [x * x * x, x + x * x, F.one]
    roots = poly_roots(f, F)
    assert {r.code for r in roots} == {x.code, (x * x).code}


@given(st.sampled_from([(2, 2), (3, 2), (5, 1), (2, 3)]), st.lists(st.integers(0, 100), min_size=2, max_size=5))
def test_poly_roots_are_roots(pm, raw):
    p, m = pm
    F = ff_make(p, m)
    coeffs = [c % F.q for c in raw]
    if not any(coeffs):
        coeffs[0] = 1
    roots = poly_roots([FieldElement(F, c) for c in coeffs], F)
    deg = max(i for i, c in enumerate(coeffs) if c)
    assert len(roots) <= deg
    for r in roots:
        acc = F.zero
        for c in reversed(coeffs):
            acc = acc * r + FieldElement(F, c)
        assert acc == F.zero


def test_nth_root_and_extension_degree():
    F3 = ff_make(3)
    assert nth_root(F3(1), 2) == F3(1)
    with pytest.raises(NoRootError) as info:
        nth_root(F3(2), 2)
    assert info.value.extension_degree == 2


def test_embed_is_homomorphism():
    small, large = ff_make(2, 2), ff_make(2, 4)
    iota = embed(small, large)
    for x in small.elements():
        for y in small.elements():
            assert iota(x * y) == iota(x) * iota(y)
            assert iota(x + y) == iota(x) + iota(y)


def test_parse_format_poly_round_trip():
    assert parse_poly("x^2+x+1") == {2: 1, 1: 1, 0: 1}
    assert parse_poly("1 + 2*x") == {0: 1, 1: 2}
    assert format_poly((1, 1, 1)) == "x^2+x+1"


def test_quad_split_examples():
    assert quad_split_fp(1, -1, 0, 3) is QuadSplit.DISTINCT_SPLIT
    for p in (2, 3, 7):
        assert quad_split_fp(1, 0, 0, p) is QuadSplit.DOUBLE_ROOT
    assert quad_split_fp(1, 0, 1, 3) is QuadSplit.IRREDUCIBLE
    with pytest.raises(ValueError):
        quad_split_fp(0, 1, 1, 3)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_quad_split_matches_exhaustive_search(p):
    for a in range(1, p):
        for b in range(p):
            for c in range(p):
                roots = [x for x in range(p) if (a * x * x + b * x + c) % p == 0]
                if len(roots) == 2:
                    want = QuadSplit.DISTINCT_SPLIT
                elif len(roots) == 1:
                    want = QuadSplit.DOUBLE_ROOT
                else:
                    want = QuadSplit.IRREDUCIBLE
                assert quad_split_fp(a, b, c, p) is want
