"""Dieudonne modules of p-torsion group schemes and Brauer-class counts.

Catalog (over a ring with coefficients in F_{p^2}):

    MuP               (d)             = O(-1)
    ZmodP             (1)             = O
    OrdinaryEllP      diag(1, d)      = O (+) O(-1)
    SupersingularEllP [[0, d], [1, 0]]

H^n of a product of elliptic curves (or an abelian variety with split
p-torsion) is the n-th exterior power of the direct sum of the blocks.
The number of p-torsion Brauer classes that do not come from the integral
model is rank(H^2) - dim Ker(phi - d).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
from math import comb

from .errors import HypothesisError
from .fixpt import fp_hom, fp_kernel
from .gf import QuadSplit, ff_make, is_prime, quad_split_fp
from .phimod import (
    PhiModule,
    SlopeFiltration,
    _lift,
    filtration_dsum,
    filtration_wedge,
    pm_dsum,
    pm_geometric_polygon,
    pm_hodge_polygon,
    pm_hodge_slopes,
    pm_slope_filtration,
    pm_total_slope,
    pm_wedge,
    triangular_defect,
)
from .matrix import identity
from .tilt import RingConfig


class Kind(Enum):
    MU_P = "MuP"
    Z_MOD_P = "ZmodP"
    ORDINARY = "OrdinaryEllP"
    SUPERSINGULAR = "SupersingularEllP"

    @classmethod
    def parse(cls, text) -> "Kind":
        if isinstance(text, Kind):
            return text
        key = str(text).strip().lower()
        for kind, names in _ALIASES.items():
            if key in names:
                return kind
        raise ValueError(f"unknown Dieudonne block {text!r} (use mu, z, ord or ss)")

    @property
    def is_elliptic(self) -> bool:
        return self in (Kind.ORDINARY, Kind.SUPERSINGULAR)


_ALIASES = {
    Kind.MU_P: {"mup", "mu", "mu_p"},
    Kind.Z_MOD_P: {"zmodp", "z", "z/p", "zp"},
    Kind.ORDINARY: {"ordinaryellp", "ord", "ordinary"},
    Kind.SUPERSINGULAR: {"supersingularellp", "ss", "supersingular"},
}


def dd_config(p: int, P=8, m: int = 2, D: int = 1) -> RingConfig:
    """Ring used for Dieudonne builds; F_{p^2} holds the supersingular eigenvectors."""
    return RingConfig(ff_make(p, m), D, Fraction(P))


@dataclass(frozen=True)
class DieudonneSpec:
    kind: Kind
    p: int
    realized: PhiModule

    @property
    def rank(self) -> int:
        return self.realized.r


def dd_make(kind, p: int, config: RingConfig | None = None) -> DieudonneSpec:
    kind = Kind.parse(kind)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    config = config or dd_config(p)
    if config.p != p:
        raise ValueError(f"ring has characteristic {config.p}, not {p}")
    rows = {
        Kind.MU_P: [["d"]],
        Kind.Z_MOD_P: [["1"]],
        Kind.ORDINARY: [["1", "0"], ["0", "d"]],
        Kind.SUPERSINGULAR: [["0", "d"], ["1", "0"]],
    }[kind]
    return DieudonneSpec(kind, p, PhiModule.from_strings(config, rows))


def dd_h1(blocks) -> PhiModule:
    blocks = list(blocks)
    if not blocks:
        raise ValueError("at least one block is required")
    M = blocks[0].realized
    for b in blocks[1:]:
        M = pm_dsum(M, b.realized)
    return M


def dd_abelian_hn(blocks, n: int) -> PhiModule:
    """n-th exterior power of the sum of the blocks (rank C(2g, n) for elliptic blocks)."""
    H1 = dd_h1(blocks)
    if not 0 <= n <= H1.r:
        raise ValueError(f"degree {n} out of range 0..{H1.r}")
    return pm_wedge(H1, n)


def expected_total_slope(g: int, n: int) -> int:
    """Sum of i * h^{i, n-i} with h^{i, n-i} = C(g, i) C(g, n-i)."""
    return sum(i * comb(g, i) * comb(g, n - i) for i in range(n + 1))


def abelian_hodge_numbers(g: int, n: int) -> list[int]:
    return [comb(g, i) * comb(g, n - i) for i in range(n + 1)]


@dataclass
class HodgeCheck:
    g: int
    n: int
    p: int
    total_slope: Fraction
    expected: int
    hodge_slopes: list
    polygon: object
    geometric: object

    @property
    def passed(self) -> bool:
        return (
            self.total_slope == self.expected
            and all(b.denominator == 1 for b in self.hodge_slopes)
            and self.polygon == self.geometric
        )


def dd_hodge_check(blocks, n: int) -> HodgeCheck:
    """Compare TS, Hodge slopes and polygon of H^n with the geometric prediction."""
    blocks = list(blocks)
    g = sum(b.rank for b in blocks) // 2
    H = dd_abelian_hn(blocks, n)
    ts = pm_total_slope(H)
    betas = pm_hodge_slopes(H)
    return HodgeCheck(
        g, n, blocks[0].p, ts, expected_total_slope(g, n), betas,
        pm_hodge_polygon(betas), pm_geometric_polygon(abelian_hodge_numbers(g, n)),
    )


# -- filtrations of Dieudonne builds ----------------------------------------

def _block_filtration(block: DieudonneSpec) -> SlopeFiltration:
    M = block.realized
    if block.kind is Kind.SUPERSINGULAR:
        return pm_slope_filtration(M)
    # already upper triangular in the standard basis
    slopes = tuple(M.A[i][i].val() for i in range(M.r))
    return SlopeFiltration(slopes, tuple(tuple(r) for r in identity(M.config, M.r)), M.config)


def dd_filtration(blocks, n: int) -> tuple[PhiModule, SlopeFiltration]:
    """H^n together with the filtration induced from triangular bases of the blocks."""
    blocks = list(blocks)
    filts = [_block_filtration(b) for b in blocks]
    target = filts[0].config
    for f in filts[1:]:
        if f.config.D % target.D:
            target = target.replace(D=target.D * f.config.D)
    filts = [_retarget(f, target) for f in filts]
    F = filts[0]
    for f in filts[1:]:
        F = filtration_dsum(F, f)
    Fn = filtration_wedge(F, n)
    H = dd_abelian_hn(blocks, n).with_config(target)
    return H, Fn


def _retarget(f: SlopeFiltration, config: RingConfig) -> SlopeFiltration:
    if f.config == config:
        return f
    return SlopeFiltration(f.slopes, tuple(tuple(_lift(x, config) for x in row) for row in f.basis),
                           config)


@dataclass
class MargheritaReport:
    p: int
    rank: int
    max_slope: Fraction
    expected_max_slope: Fraction
    triangular: bool
    kernel_dim: int
    gap: int
    certified_P: Fraction
    certified_D: int

    @property
    def passed(self) -> bool:
        return self.triangular and self.max_slope == self.expected_max_slope


def dd_margherita(p: int, P=8, *, compute_gap: bool = True, verify: bool = True) -> MargheritaReport:
    """H^3 of a product of three supersingular elliptic curves."""
    config = dd_config(p, P)
    blocks = [dd_make(Kind.SUPERSINGULAR, p, config)] * 3
    H, F = dd_filtration(blocks, 3)
    tri = not triangular_defect(H, F) if verify else True
    if compute_gap:
        K = fp_kernel(dd_abelian_hn(blocks, 3), 2)
        kdim, cP, cD = K.dim, K.certified_P, K.certified_D
    else:
        kdim, cP, cD = -1, Fraction(0), 0
    return MargheritaReport(
        p, H.r, max(F.slopes), Fraction(3 * p, p + 1), tri, kdim,
        H.r - kdim if compute_gap else -1, cP, cD,
    )


# -- Brauer dimensions ------------------------------------------------------

def dd_brauer_gap(M: PhiModule, alpha=1) -> int:
    return M.r - fp_kernel(M, alpha).dim


@dataclass
class BrauerReport:
    generic_dim: int
    integral_dim: int
    quotient_dim: int
    gap_crosscheck: int | None = None
    witnesses: list = dc_field(default_factory=list)

    def __post_init__(self):
        if self.quotient_dim != self.generic_dim - self.integral_dim or self.quotient_dim < 0:
            raise ValueError("inconsistent Brauer report")

    @property
    def consistent(self) -> bool:
        return self.gap_crosscheck is None or self.gap_crosscheck == self.quotient_dim


GENERIC_HOM_DIM = 4  # Hom(E[p], E'[p]) over an algebraically closed field: (Z/p)^2 -> (Z/p)^2


def _witnesses(z: Kind, w: Kind) -> list[str]:
    if z is Kind.ORDINARY and w is Kind.ORDINARY:
        return ["any homomorphism sending the connected part mu_p of Z[p] outside the connected part of W[p]"]
    if Kind.SUPERSINGULAR in (z, w) and Kind.ORDINARY in (z, w):
        return ["homomorphisms with nonzero component onto the etale quotient Z/p do not extend"]
    return ["maps not induced by the integral endomorphism algebra (a copy of F_{p^2})"]


def dd_hom_brauer(Z: DieudonneSpec, W: DieudonneSpec, *, crosscheck: bool = True) -> BrauerReport:
    """Dimension of Hom(Z[p], W[p]) over C_p modulo those extending to O_{C_p}."""
    if not (Z.kind.is_elliptic and W.kind.is_elliptic):
        raise ValueError("both blocks must be elliptic (rank 2)")
    integral = fp_hom(W.realized, Z.realized).dim
    gap = None
    if crosscheck:
        H2 = dd_abelian_hn([Z, W], 2)
        gap = dd_brauer_gap(H2, 1)
    return BrauerReport(GENERIC_HOM_DIM, integral, GENERIC_HOM_DIM - integral, gap,
                        _witnesses(Z.kind, W.kind))


# -- CM curves --------------------------------------------------------------

def kronecker(delta: int, p: int) -> int:
    """Kronecker symbol (delta / p) for a prime p, with the mod-8 rule at p = 2."""
    if p == 2:
        if delta % 2 == 0:
            return 0
        return 1 if delta % 8 in (1, 7) else -1
    a = delta % p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@dataclass(frozen=True)
class CMSpec:
    delta: int
    p: int
    gamma: tuple
    reduction: str  # "Ordinary" | "Supersingular"

    @property
    def ramified(self) -> bool:
        return self.delta % self.p == 0


def cm_spec(delta: int, p: int) -> CMSpec:
    if delta >= 0 or delta % 4 not in (0, 1):
        raise ValueError(f"{delta} is not a negative discriminant (must be < 0 and = 0, 1 mod 4)")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    c = (delta * (1 - delta) // 4) % p
    gamma = ((0, c), (1, delta % p))
    red = "Ordinary" if kronecker(delta, p) == 1 else "Supersingular"
    return CMSpec(delta, p, gamma, red)


@dataclass(frozen=True)
class Certificate:
    a: int
    b: int
    t: int
    trace: int
    det: int
    split: QuadSplit
    rule: str

    @property
    def charpoly(self) -> tuple[int, int, int]:
        """Coefficients (1, -trace, det) of X^2 - trace X + det."""
        return (1, -self.trace, self.det)


@dataclass
class CMReport:
    spec: CMSpec
    quotient_dim: int
    integral_trivial: bool
    certificates: list
    generator: str = ""

    @property
    def complete(self) -> bool:
        p = self.spec.p
        return (
            self.spec.reduction == "Ordinary"
            or (len(self.certificates) == p * p - 1
                and all(c.split is QuadSplit.DISTINCT_SPLIT for c in self.certificates))
        )


def _theta_gamma(a, b, t, spec: CMSpec):
    p = spec.p
    (_, c), (_, dl) = spec.gamma
    # theta = a e1 + b e2 = [[0, b], [0, a + b]], gamma = [[0, c], [1, delta]]
    m00, m01 = 0, (b + t * c) % p
    m10, m11 = t % p, (a + b + t * dl) % p
    trace = (m00 + m11) % p
    det = (m00 * m11 - m01 * m10) % p
    return trace, det


def _case_t(a, b, spec: CMSpec):
    p = spec.p
    c = spec.gamma[0][1]
    if (a + b) % p:
        return 0, "a+b!=0: t=0"
    if spec.ramified:
        return b % p, "ramified: t=b"
    if c % p:
        return (-b * pow(c, p - 2, p)) % p, "inert: b+t*c=0"
    return None, ""


def dd_cm_report(delta: int, p: int) -> CMReport:
    spec = cm_spec(delta, p)
    if spec.reduction == "Ordinary":
        return CMReport(spec, 1, False, [],
                        "any endomorphism not preserving the mu_p line")
    if p == 2 and delta % 2 == 0:
        raise HypothesisError("p=2 with p | delta lies outside the hypotheses (p odd or p not dividing delta)")
    certs = []
    for a in range(p):
        for b in range(p):
            if a == 0 and b == 0:
                continue
            t, rule = _case_t(a, b, spec)
            order = ([t] if t is not None else []) + [s for s in range(p) if s != t]
            for s in order:
                trace, det = _theta_gamma(a, b, s, spec)
                split = quad_split_fp(1, -trace, det, p)
                if split is QuadSplit.DISTINCT_SPLIT:
                    certs.append(Certificate(a, b, s, trace, det, split, rule if s == t else "sweep"))
                    break
            else:
                trace, det = _theta_gamma(a, b, order[0], spec)
                certs.append(Certificate(a, b, order[0], trace, det,
                                         quad_split_fp(1, -trace, det, p), "none"))
    return CMReport(spec, 2, True, certs)


# -- abelian and Kummer varieties --------------------------------------------

@dataclass
class PRankReport:
    g: int
    e: int
    p: int
    gap: int
    bound: int
    realization: str

    @property
    def satisfied(self) -> bool:
        return self.gap >= self.bound

    @property
    def attained(self) -> bool:
        return self.gap == self.bound


def dd_prank_bound(g: int, e: int, p: int, config: RingConfig | None = None) -> PRankReport:
    """Gap of H^2 for a split abelian variety with p-rank e against 2g - 1 - e."""
    if g < 2:
        raise HypothesisError("the p-rank bound needs g >= 2")
    if not 0 < e <= g:
        raise HypothesisError("the p-rank bound needs 0 < e <= g")
    config = config or dd_config(p)
    blocks = [dd_make(Kind.ORDINARY, p, config)] * e + [dd_make(Kind.SUPERSINGULAR, p, config)] * (g - e)
    gap = dd_brauer_gap(dd_abelian_hn(blocks, 2), 1)
    return PRankReport(g, e, p, gap, 2 * g - 1 - e,
                       f"split: {e} ordinary + {g - e} supersingular elliptic blocks")


def dd_kummer_dim(abelian_gap: int, p: int) -> int:
    """The gap transfers unchanged to the Kummer variety when p is odd."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        raise HypothesisError("the Kummer transfer needs p odd")
    if abelian_gap < 0:
        raise ValueError("gap must be >= 0")
    return abelian_gap


__all__ = [
    "BrauerReport", "CMReport", "CMSpec", "Certificate", "DieudonneSpec", "Kind",
    "MargheritaReport", "PRankReport", "cm_spec", "dd_abelian_hn", "dd_brauer_gap",
    "dd_cm_report", "dd_config", "dd_filtration", "dd_hodge_check", "dd_hom_brauer",
    "dd_h1", "dd_kummer_dim", "dd_make", "dd_margherita", "dd_prank_bound",
    "expected_total_slope", "kronecker",
]


