"""Free modules with a Frobenius-semilinear endomorphism.

A module of rank r is stored as its r x r matrix A: column i holds the
coordinates of phi(e_i), so phi(sum x_i e_i) = A . sigma(x) with sigma the
ring Frobenius applied entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import ConfigMismatch, GridError, NotAUnit, PrecisionExhausted, SolverError
from .gf import embed, ff_make
from .matrix import (
    Matrix,
    block_diag,
    compound,
    det_leibniz,
    identity,
    kronecker,
    mat_frob,
    mat_inverse,
    mat_mul,
    mat_vec,
    valuation_of_det,
    zeros,
)
from .tilt import AtLeastP, RingConfig, TiltElement, parse_element


@dataclass(frozen=True, eq=False)
class PhiModule:
    config: RingConfig
    A: tuple  # tuple of row tuples

    def __post_init__(self):
        A = tuple(tuple(row) for row in self.A)
        object.__setattr__(self, "A", A)
        r = len(A)
        for row in A:
            if len(row) != r:
                raise ValueError("Frobenius matrix must be square")
            for x in row:
                if x.config != self.config:
                    raise ConfigMismatch("matrix entry has a different ring configuration")

    @property
    def r(self) -> int:
        return len(self.A)

    @property
    def matrix(self) -> Matrix:
        return [list(row) for row in self.A]

    @classmethod
    def from_strings(cls, config: RingConfig, rows) -> "PhiModule":
        return cls.validated(config, [[parse_element(s, config) for s in row] for row in rows])

    @classmethod
    def validated(cls, config: RingConfig, A) -> "PhiModule":
        """Construct and check that det A is nonzero mod d^P (raises PrecisionExhausted)."""
        M = cls(config, A)
        if M.r:
            valuation_of_det(M.matrix)
        return M

    def __eq__(self, other):
        return isinstance(other, PhiModule) and self.config == other.config and self.A == other.A

    def __hash__(self):
        return hash((self.config, self.A))

    def __repr__(self):
        rows = "; ".join(", ".join(str(x) for x in row) for row in self.A)
        return f"PhiModule(r={self.r}, [{rows}])"

    def with_config(self, config: RingConfig) -> "PhiModule":
        return PhiModule(config, [[x.with_config(config) for x in row] for row in self.A])

    def extend_field(self, k: int) -> "PhiModule":
        """Base change of coefficients F_{p^m} -> F_{p^{mk}}."""
        if k == 1:
            return self
        src = self.config.field
        big = ff_make(src.p, src.m * k)
        iota = embed(src, big)
        config = self.config.replace(field=big)
        return PhiModule(config, [[x.map_coefficients(iota, config) for x in row] for row in self.A])

    def max_exponent(self) -> Fraction:
        ks = [k for row in self.A for x in row for k in x.terms]
        return Fraction(max(ks), self.config.D) if ks else Fraction(0)


def twist_module(config: RingConfig, alpha) -> PhiModule:
    """O(-alpha): rank one with phi(e) = d^alpha e."""
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ValueError("twists are defined for alpha >= 0")
    return PhiModule(config, [[TiltElement.monomial(config, 1, alpha)]])


def diagonal_module(config: RingConfig, alphas) -> PhiModule:
    r = len(alphas)
    A = zeros(config, r, r)
    for i, a in enumerate(alphas):
        A[i][i] = TiltElement.monomial(config, 1, Fraction(a))
    return PhiModule(config, A)


def zero_module(config: RingConfig) -> PhiModule:
    return PhiModule(config, [])


# -- basic operations -------------------------------------------------------

def pm_apply(M: PhiModule, v) -> list:
    if len(v) != M.r:
        raise ValueError(f"vector of length {len(v)} for a rank-{M.r} module")
    return mat_vec(M.matrix, [x.frobenius() for x in v])


def pm_base_change(M: PhiModule, C: Matrix) -> PhiModule:
    """Matrix of phi in the basis given by the columns of C: C^{-1} A sigma(C)."""
    if len(C) != M.r:
        raise ValueError("change-of-basis matrix has the wrong size")
    if M.r == 0:
        return M
    try:
        Cinv = mat_inverse(C)
    except NotAUnit as exc:
        raise NotAUnit("change-of-basis matrix is not invertible over the ring") from exc
    return PhiModule(M.config, mat_mul(mat_mul(Cinv, M.matrix), mat_frob(C)))


def pm_determinant(M: PhiModule) -> TiltElement:
    return det_leibniz(M.matrix)


def pm_total_slope(M: PhiModule) -> Fraction:
    """d-adic valuation of det A (column-pivoted elimination)."""
    if M.r == 0:
        return Fraction(0)
    v, _ = valuation_of_det(M.matrix)
    return v


# -- Hodge slopes via Smith normal form -------------------------------------

def smith_diagonal(A: Matrix, config: RingConfig) -> list[Fraction]:
    """Valuations of the elementary divisors of A over the truncated valuation ring.

    Pivot = entry of minimal valuation, ties broken by (row, column); the
    pivot row and column are cleared with the pivot's unit part inverted.
    Absolute precision is preserved: every multiplier is integral and is
    applied to a row or column whose entries have valuation >= the pivot's.
    """
    D = config.D
    work = [list(row) for row in A]
    n = len(work)
    rows = list(range(n))
    cols = list(range(n))
    out = []
    while rows:
        best = None
        for i in rows:
            for j in cols:
                v = work[i][j].val_num()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            raise PrecisionExhausted(
                f"{len(rows)} elementary divisor(s) vanish modulo d^{config.P}; raise the precision"
            )
        v, pi, pj = best
        unit_inv = work[pi][pj].shift(Fraction(-v, D)).invert_unit()
        for i in rows:
            if i != pi and work[i][pj]:
                f = work[i][pj].shift(Fraction(-v, D)) * unit_inv
                for j in cols:
                    if work[pi][j]:
                        work[i][j] = work[i][j] - f * work[pi][j]
        for j in cols:
            if j != pj and work[pi][j]:
                f = work[pi][j].shift(Fraction(-v, D)) * unit_inv
                for i in rows:
                    if work[i][pj]:
                        work[i][j] = work[i][j] - f * work[i][pj]
        out.append(Fraction(v, D))
        rows.remove(pi)
        cols.remove(pj)
    return sorted(out)


def pm_hodge_slopes(M: PhiModule) -> list[Fraction]:
    """Hodge slopes beta_1 <= ... <= beta_r: coker(phi) = (+) O/d^{beta_i}."""
    if M.r == 0:
        return []
    return smith_diagonal(M.matrix, M.config)


@dataclass(frozen=True)
class HodgePolygon:
    """Convex polygon through (0,0), stored by its vertices only."""

    breakpoints: tuple

    @classmethod
    def from_points(cls, points) -> "HodgePolygon":
        pts = [(Fraction(x), Fraction(y)) for x, y in points]
        verts = [pts[0]]
        for pt in pts[1:]:
            if pt[0] == verts[-1][0]:
                if pt[1] != verts[-1][1]:
                    raise ValueError("vertical segment in a Hodge polygon")
                continue
            if len(verts) >= 2:
                (x0, y0), (x1, y1) = verts[-2], verts[-1]
                if (y1 - y0) * (pt[0] - x1) == (pt[1] - y1) * (x1 - x0):
                    verts[-1] = pt
                    continue
            verts.append(pt)
        for a, b, c in zip(verts, verts[1:], verts[2:]):
            if (b[1] - a[1]) / (b[0] - a[0]) > (c[1] - b[1]) / (c[0] - b[0]):
                raise ValueError("segment slopes must be non-decreasing")
        return cls(tuple(verts))

    @property
    def height(self) -> Fraction:
        return self.breakpoints[-1][1]

    @property
    def width(self) -> Fraction:
        return self.breakpoints[-1][0]

    def to_tsv(self) -> str:
        return "".join(f"{fmt_q(x)}\t{fmt_q(y)}\n" for x, y in self.breakpoints)


def fmt_q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def pm_hodge_polygon(betas) -> HodgePolygon:
    betas = [Fraction(b) for b in betas]
    if betas != sorted(betas):
        raise ValueError("Hodge slopes must be sorted ascending")
    pts = [(0, 0)]
    acc = Fraction(0)
    for j, b in enumerate(betas, start=1):
        acc += b
        pts.append((j, acc))
    return HodgePolygon.from_points(pts)


def pm_geometric_polygon(h) -> HodgePolygon:
    """Polygon with a slope-i segment of horizontal length h[i] (h = h^{0,n}, ..., h^{n,0})."""
    if any(x < 0 for x in h):
        raise ValueError("Hodge numbers must be non-negative")
    pts = [(0, 0)]
    x = y = 0
    for i, hi in enumerate(h):
        x += hi
        y += i * hi
        pts.append((x, y))
    return HodgePolygon.from_points(pts)


# -- constructions ----------------------------------------------------------

def _same(M: PhiModule, N: PhiModule):
    if M.config != N.config:
        raise ConfigMismatch("modules live over different ring configurations")


def pm_dsum(M: PhiModule, N: PhiModule) -> PhiModule:
    _same(M, N)
    return PhiModule(M.config, block_diag(M.matrix, N.matrix, M.config))


def pm_tensor(M: PhiModule, N: PhiModule) -> PhiModule:
    """Basis e_i (x) f_j in lexicographic (i, j) order."""
    _same(M, N)
    return PhiModule(M.config, kronecker(M.matrix, N.matrix))


def pm_wedge(M: PhiModule, k: int) -> PhiModule:
    """k-th exterior power; basis indexed by sorted k-subsets in lexicographic order."""
    if not 0 <= k <= M.r:
        raise ValueError(f"exterior power {k} out of range for rank {M.r}")
    return PhiModule(M.config, compound(M.matrix, k, M.config))


def pm_twist(M: PhiModule, alpha) -> PhiModule:
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ValueError("twists are defined for alpha >= 0")
    if not M.config.on_grid(alpha):
        raise GridError(f"twist {alpha} is not on the grid (1/{M.config.D})Z")
    return PhiModule(M.config, [[x.shift(alpha) for x in row] for row in M.A])


# -- filtration -------------------------------------------------------------

@dataclass(frozen=True)
class SlopeFiltration:
    """Upper-triangular witness: C^{-1} A sigma(C) is triangular with
    diagonal (unit) * d^{slopes[i]}; the first basis vector spans the
    bottom step of the filtration."""

    slopes: tuple
    basis: tuple
    config: RingConfig

    @property
    def total(self) -> Fraction:
        return sum(self.slopes, Fraction(0))


def triangular_defect(M: PhiModule, F: SlopeFiltration) -> list[tuple]:
    """Entries that break the triangular form (empty list means verified)."""
    Mc = M if M.config == F.config else _match(M, F.config)
    T = pm_base_change(Mc, [list(r) for r in F.basis]).matrix
    bad = []
    for i in range(len(T)):
        for j in range(i):
            if T[i][j]:
                bad.append((i, j, T[i][j]))
        x = T[i][i]
        if x.val() != F.slopes[i]:
            bad.append((i, i, x))
    return bad


def _match(M: PhiModule, config: RingConfig) -> PhiModule:
    if M.config.field != config.field:
        M = M.extend_field(config.field.m // M.config.field.m)
    return M.with_config(config)


def _extend_to_basis(x: list, config: RingConfig) -> tuple[Matrix, int]:
    """Columns x, e_j (j != pivot) where pivot is the first unit coordinate of x."""
    piv = next((i for i, c in enumerate(x) if c.is_unit()), None)
    if piv is None:
        raise ValueError("vector lies in m M (no unit coordinate)")
    r = len(x)
    C = identity(config, r)
    others = [j for j in range(r) if j != piv]
    for i in range(r):
        C[i][0] = x[i]
    for col, j in enumerate(others, start=1):
        for i in range(r):
            C[i][col] = TiltElement.one(config) if i == j else TiltElement.zero(config)
    return C, piv


def pm_quotient_by_vector(M: PhiModule, x, i=None) -> PhiModule:
    """Module M/<x> for a primitive eigenvector x (phi(x) = d^i x)."""
    if len(x) != M.r:
        raise ValueError("vector length does not match the rank")
    C, _ = _extend_to_basis(list(x), M.config)
    T = pm_base_change(M, C).matrix
    if any(T[k][0] for k in range(1, M.r)):
        raise ValueError("x is not a Frobenius eigenvector: <x> is not phi-stable")
    if i is not None and T[0][0].val() != Fraction(i):
        raise ValueError(f"phi(x) has valuation {T[0][0].val()}, not {i}")
    return PhiModule(M.config, [row[1:] for row in T[1:]])


def pm_slope_filtration(M: PhiModule, *, max_extension: int = 8) -> SlopeFiltration:
    """Greedy filtration: extract a primitive eigenvector with minimal exponent, recurse.

    The slope multiset is a witness only; their sum is the invariant.
    """
    from .fixpt import fp_min_eigenvector

    if M.r == 0:
        return SlopeFiltration((), (), M.config)
    if M.r == 1:
        a = M.A[0][0]
        v = a.val()
        if isinstance(v, AtLeastP):
            raise PrecisionExhausted("rank-one Frobenius vanishes at this precision")
        return SlopeFiltration((v,), ((TiltElement.one(M.config),),), M.config)
    i, x, Mx = fp_min_eigenvector(M, max_extension=max_extension)
    # Mx is M re-expressed over the (possibly extended / refined) working ring
    C0, _ = _extend_to_basis(x, Mx.config)
    T = pm_base_change(Mx, C0).matrix
    if any(T[k][0] for k in range(1, Mx.r)):
        raise SolverError("eigenvector does not span a phi-stable line at this precision")
    Q = PhiModule(Mx.config, [row[1:] for row in T[1:]])
    sub = pm_slope_filtration(Q, max_extension=max_extension)
    config = sub.config
    if config != Mx.config:
        C0 = [[_lift(c, config) for c in row] for row in C0]
    one = TiltElement.one(config)
    zero = TiltElement.zero(config)
    blk = [[one] + [zero] * (Mx.r - 1)]
    for row in sub.basis:
        blk.append([zero] + list(row))
    C = mat_mul(C0, blk)
    return SlopeFiltration((i,) + tuple(sub.slopes), tuple(tuple(r) for r in C), config)


def _lift(x: TiltElement, config: RingConfig) -> TiltElement:
    if x.config.field != config.field:
        src, dst = x.config.field, config.field
        iota = embed(src, dst)
        x = x.map_coefficients(iota, x.config.replace(field=dst))
    return x.with_config(config)


def filtration_dsum(F1: SlopeFiltration, F2: SlopeFiltration) -> SlopeFiltration:
    """Filtration of M (+) N with the M-steps first."""
    if F1.config != F2.config:
        raise ConfigMismatch("filtrations over different rings")
    C = block_diag([list(r) for r in F1.basis], [list(r) for r in F2.basis], F1.config)
    return SlopeFiltration(F1.slopes + F2.slopes, tuple(tuple(r) for r in C), F1.config)


def filtration_wedge(F: SlopeFiltration, k: int) -> SlopeFiltration:
    """Induced filtration on the k-th exterior power (compound of a triangular basis)."""
    from itertools import combinations

    n = len(F.slopes)
    C = compound([list(r) for r in F.basis], k, F.config)
    slopes = tuple(sum((F.slopes[i] for i in s), Fraction(0)) for s in combinations(range(n), k))
    return SlopeFiltration(slopes, tuple(tuple(r) for r in C), F.config)


# -- splitting --------------------------------------------------------------

def pm_split_as_twists(M: PhiModule, i) -> list | None:
    """Basis of eigenvectors phi(x_j) = d^i x_j if M is a sum of copies of O(-i), else None."""
    from .fixpt import fp_kernel

    i = Fraction(i)
    ts = pm_total_slope(M)
    if ts != i * M.r:
        raise ValueError(f"total slope {ts} differs from i*r = {i * M.r}")
    K = fp_kernel(M, i)
    if K.dim < M.r:
        return None
    cfg = K.config.replace(floor=0)
    cols = [[x.with_config(cfg) for x in vec] for vec in K.basis]
    C = [[cols[j][row] for j in range(M.r)] for row in range(M.r)]
    try:
        mat_inverse(C)
    except NotAUnit:
        return None
    return cols


def ts_identity_expectations(M: PhiModule, N: PhiModule, k: int) -> dict:
    """Determinant identities for total slopes of sums, tensors and wedges."""
    tm, tn = pm_total_slope(M), pm_total_slope(N)
    return {
        "dsum": tm + tn,
        "tensor": N.r * tm + M.r * tn,
        "wedge": comb(M.r - 1, k - 1) * tm if k >= 1 else Fraction(0),
    }
