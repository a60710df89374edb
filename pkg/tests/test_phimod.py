import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from support import config, random_invertible, random_module
from tiltphi.errors import ConfigMismatch, GridError, NotAUnit, PrecisionExhausted, SolverError
from tiltphi.matrix import det_leibniz
from tiltphi.phimod import (
    HodgePolygon,
    PhiModule,
    diagonal_module,
    filtration_dsum,
    filtration_wedge,
    pm_apply,
    pm_base_change,
    pm_dsum,
    pm_geometric_polygon,
    pm_hodge_polygon,
    pm_hodge_slopes,
    pm_quotient_by_vector,
    pm_slope_filtration,
    pm_split_as_twists,
    pm_tensor,
    pm_total_slope,
    pm_twist,
    pm_wedge,
    triangular_defect,
    ts_identity_expectations,
    twist_module,
)
from tiltphi.tilt import TiltElement

POINTS = [(2, 1), (3, 1), (5, 1), (2, 2)]


def test_twist_and_diagonal():
    c = config(3, D=2)
    assert pm_total_slope(twist_module(c, Fraction(3, 2))) == Fraction(3, 2)
    M = diagonal_module(c, [0, 1, Fraction(5, 2)])
    assert pm_total_slope(M) == Fraction(7, 2)
    assert pm_hodge_slopes(M) == [0, 1, Fraction(5, 2)]
    with pytest.raises(ValueError):
        twist_module(c, -1)


def test_apply_is_semilinear():
    c = config(2, m=2)
    M = PhiModule.from_strings(c, [["0", "d"], ["1", "0"]])
    g = c.field.gen
    v = [TiltElement.constant(c, g), TiltElement.zero(c)]
    assert pm_apply(M, v) == [TiltElement.zero(c), TiltElement.constant(c, g * g)]


def test_singular_matrix_rejected():
    c = config(2)
    with pytest.raises(PrecisionExhausted):
        PhiModule.from_strings(c, [["1", "1"], ["1", "1"]])


def test_non_unit_base_change_rejected():
    c = config(2)
    M = diagonal_module(c, [0, 1])
    d = TiltElement.monomial(c, 1, 1)
    with pytest.raises(NotAUnit):
        pm_base_change(M, [[d, TiltElement.zero(c)], [TiltElement.zero(c), TiltElement.one(c)]])


def test_example_slope_module():
    c = config(2, D=2)
    M = PhiModule.from_strings(c, [["d^{2}", "1"], ["0", "d^{1/2}"]])
    assert pm_total_slope(M) == Fraction(5, 2)
    assert pm_hodge_slopes(M) == [0, Fraction(5, 2)]
    F = pm_slope_filtration(M)
    assert F.total == Fraction(5, 2)
    assert not triangular_defect(M, F)


def test_twist_shifts_total_slope():
    c = config(3, D=2)
    M = random_module(random.Random(3), c, 3)
    assert pm_total_slope(pm_twist(M, Fraction(1, 2))) == pm_total_slope(M) + Fraction(3, 2)
    with pytest.raises(GridError):
        pm_twist(M, Fraction(1, 3))


def test_mismatched_configs():
    with pytest.raises(ConfigMismatch):
        pm_dsum(twist_module(config(2), 1), twist_module(config(3), 1))


# -- polygons ---------------------------------------------------------------

def test_hodge_polygon_breakpoints():
    assert pm_hodge_polygon([0, 1]).breakpoints == ((0, 0), (1, 0), (2, 1))
    assert pm_hodge_polygon([0, 0, 1, 1]).breakpoints == ((0, 0), (2, 0), (4, 2))
    assert pm_geometric_polygon([1, 4, 1]).breakpoints == ((0, 0), (1, 0), (5, 4), (6, 6))
    with pytest.raises(ValueError):
        pm_hodge_polygon([1, 0])


def test_polygon_tsv_and_validation():
    poly = pm_hodge_polygon([0, Fraction(5, 2)])
    assert poly.to_tsv() == "0/1\t0/1\n1/1\t0/1\n2/1\t5/2\n"
    assert poly.height == Fraction(5, 2) and poly.width == 2
    with pytest.raises(ValueError):
        HodgePolygon.from_points([(0, 0), (1, 1), (2, 1)])


# -- properties -------------------------------------------------------------

@given(st.integers(0, 10**6), st.sampled_from(POINTS), st.integers(1, 4))
def test_hodge_sum_is_total_slope(seed, pm, r):
    p, m = pm
    c = config(p, m, D=2, P=10)
    M = random_module(random.Random(seed), c, r)
    betas = pm_hodge_slopes(M)
    assert betas == sorted(betas)
    assert sum(betas) == pm_total_slope(M)
    poly = pm_hodge_polygon(betas)
    assert poly.height == pm_total_slope(M) and poly.width == r


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(POINTS), st.integers(1, 3))
def test_base_change_invariants(seed, pm, r):
    p, m = pm
    c = config(p, m, D=1, P=10)
    rng = random.Random(seed)
    M = random_module(rng, c, r)
    C = random_invertible(rng, c, r)
    N = pm_base_change(M, C)
    assert pm_total_slope(N) == pm_total_slope(M)
    assert pm_hodge_slopes(N) == pm_hodge_slopes(M)
    assert det_leibniz(C).is_unit()


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from([(2, 1), (3, 1)]))
def test_total_slope_identities(seed, pm):
    p, m = pm
    c = config(p, m, D=1, P=12)
    rng = random.Random(seed)
    M = random_module(rng, c, 2, 2)
    N = random_module(rng, c, 2, 2)
    exp = ts_identity_expectations(M, N, 2)
    assert pm_total_slope(pm_dsum(M, N)) == exp["dsum"]
    assert pm_total_slope(pm_tensor(M, N)) == exp["tensor"]
    assert pm_total_slope(pm_wedge(M, 2)) == exp["wedge"]
    assert pm_total_slope(pm_wedge(M, 1)) == pm_total_slope(M)


@pytest.mark.parametrize("p", [2, 3])
def test_greedy_filtration_is_a_witness(p):
    # fixed vectors that need p-power exponent towers are not representable
    # on a finite grid; those modules raise SolverError by design
    c = config(p, D=1, P=8)
    solved = 0
    for seed in range(20):
        M = random_module(random.Random(seed), c, 2, 2)
        try:
            F = pm_slope_filtration(M)
        except SolverError:
            continue
        solved += 1
        assert F.total == pm_total_slope(M)
        assert not triangular_defect(M, F)
    assert solved >= 12


def test_greedy_filtration_needs_degree_seven():
    # reduction mod d has order 7 in GL_3(F_2): unit-fixed vectors live over F_128
    c = config(2, D=1, P=8)
    M = PhiModule.from_strings(c, [["0", "1", "1"], ["1 + d", "1 + d", "d^{2}"], ["1", "d + d^{2}", "0"]])
    assert pm_total_slope(M) == 0
    F = pm_slope_filtration(M)
    assert F.config.field.m == 7
    assert F.slopes == (0, 0, 0)
    assert not triangular_defect(M, F)


def test_unrepresentable_fixed_vectors_raise():
    c = config(2, D=1, P=8)
    M = PhiModule.from_strings(c, [["1", "d"], ["d^{2}", "0"]])
    with pytest.raises(SolverError):
        pm_slope_filtration(M)


def test_filtration_dsum_and_wedge():
    c = config(2, D=2)
    M = PhiModule.from_strings(c, [["d^{2}", "1"], ["0", "d^{1/2}"]])
    F = pm_slope_filtration(M)
    Mf = M if M.config == F.config else M.with_config(F.config)
    S = filtration_dsum(F, F)
    assert S.total == 2 * F.total
    assert not triangular_defect(pm_dsum(Mf, Mf), S)
    W = filtration_wedge(S, 2)
    assert W.total == 3 * S.total
    assert not triangular_defect(pm_wedge(pm_dsum(Mf, Mf), 2), W)


def test_quotient_by_eigenvector():
    c = config(2, D=2)
    M = PhiModule.from_strings(c, [["d^{2}", "1"], ["0", "d^{1/2}"]])
    x = [TiltElement.one(c), TiltElement.zero(c)]
    Q = pm_quotient_by_vector(M, x, 2)
    assert Q.r == 1 and pm_total_slope(Q) == Fraction(1, 2)
    with pytest.raises(ValueError):
        pm_quotient_by_vector(M, [TiltElement.zero(c), TiltElement.one(c)])
    with pytest.raises(ValueError):
        pm_quotient_by_vector(M, x, 1)


# -- splitting as twists ----------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_split_recovers_scrambled_twists(p, r):
    c = config(p, D=1, P=8)
    rng = random.Random(100 * p + r)
    for i in (0, 1):
        M = pm_base_change(diagonal_module(c, [i] * r), random_invertible(rng, c, r))
        cols = pm_split_as_twists(M, i)
        assert cols is not None and len(cols) == r
        cfg = cols[0][0].config
        Mc = M.with_config(cfg)
        d = TiltElement.monomial(cfg, 1, i)
        for x in cols:
            assert pm_apply(Mc, x) == [d * y for y in x]


def test_split_refuses_non_split_module():
    c = config(2, m=2, D=1)
    M = PhiModule.from_strings(c, [["0", "d"], ["1", "0"]])
    # TS = 1 = i*r only for i = 1/2; the kernel at 1/2 is one-dimensional
    assert pm_split_as_twists(M, Fraction(1, 2)) is None
    M2 = PhiModule.from_strings(config(2, D=2), [["d", "1"], ["0", "d"]])
    assert pm_split_as_twists(M2, 1) is None


def test_split_rejects_wrong_total_slope():
    c = config(2)
    with pytest.raises(ValueError):
        pm_split_as_twists(diagonal_module(c, [0, 1]), 1)
