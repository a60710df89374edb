"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from tiltphi.gf import ff_make
from tiltphi.linalg import nullspace_dense
from tiltphi.matrix import det_leibniz
from tiltphi.phimod import PhiModule
from tiltphi.tilt import RingConfig, TiltElement


def config(p, m=1, D=1, P=8):
    return RingConfig(ff_make(p, m), D, Fraction(P))


def random_element(rng: random.Random, cfg: RingConfig, max_val=3, density=0.35, unit=False):
    F = cfg.field
    terms = {}
    for k in range(0, max_val * cfg.D + 1):
        if rng.random() < density:
            terms[k] = rng.randrange(1, F.q)
    if unit:
        terms[0] = rng.randrange(1, F.q)
    return TiltElement(cfg, terms)


def random_module(rng, cfg, r, max_val=3):
    """Random module whose determinant survives truncation."""
    while True:
        A = [[random_element(rng, cfg, max_val) for _ in range(r)] for _ in range(r)]
        try:
            M = PhiModule(cfg, A)
            if det_leibniz(M.matrix):
                return M
        except ValueError:
            pass


def random_invertible(rng, cfg, r, max_val=2):
    while True:
        C = [[random_element(rng, cfg, max_val) for _ in range(r)] for _ in range(r)]
        if det_leibniz(C).is_unit():
            return C


def dense_kernel_dim(M, alpha, D, P, window):
    """Independent oracle for dim Ker(phi - d^alpha).

    Builds the dense F_p matrix column by column by pushing each unit unknown
    (coordinate u, exponent k, F_p-basis vector l) through A sigma(x) - d^alpha x
    with ordinary ring arithmetic, then projects the nullspace onto the
    exponents below ``window``.
    """
    cfg = M.config.replace(D=D, P=Fraction(P))
    F = cfg.field
    p, m, r = F.p, F.m, M.r
    A = [[x.with_config(cfg) for x in row] for row in M.A]
    da = TiltElement.monomial(cfg, 1, alpha)
    unknowns = [(u, k, l) for k in range(cfg.Pn) for u in range(r) for l in range(m)]
    eq_index = {}
    cols = []
    for u, k, l in unknowns:
        coeffs = [0] * m
        coeffs[l] = 1
        e = TiltElement(cfg, {k: F.from_coeffs(coeffs)})
        se = e.frobenius()
        col = {}
        for i in range(r):
            val = A[i][u] * se - (da * e if i == u else TiltElement.zero(cfg))
            for kk, c in val.terms.items():
                for ll, a in enumerate(F.to_coeffs(c)):
                    if a:
                        idx = eq_index.setdefault((i, kk, ll), len(eq_index))
                        col[idx] = a
        cols.append(col)
    rows = [[0] * len(unknowns) for _ in range(len(eq_index))]
    for j, col in enumerate(cols):
        for i, a in col.items():
            rows[i][j] = a
    if not rows:
        rows = [[0] * len(unknowns)]
    null = nullspace_dense(rows, p)
    w = int(Fraction(window) * D)
    low = [j for j, (u, k, l) in enumerate(unknowns) if k < w]
    proj = [[v[j] for j in low] for v in null]
    if not proj:
        return 0
    return len(low) - len(nullspace_dense(proj, p))

