"""Fixed points of semilinear maps by linear algebra over F_p.

Every problem handled here has the shape

    sum_L  a * X_u  -  sum_R  b * sigma(X_u)  =  0   (mod d^P)

with unknown ring elements X_u and known coefficients a, b.  Writing each
unknown as its coefficients c_{u,k} at grid exponents k, and each
coefficient as a vector over F_p, the left side is F_p-linear in the
unknowns (c -> c^p is F_p-linear).  So one sparse nullspace computation
over F_p answers the question.

Truncation admits fake solutions supported near d^P.  The remedy used
here: each problem has a "window" of low exponents that determines a
genuine solution uniquely, so we measure the projection of the truncated
nullspace onto the window.  That projection can only shrink as P grows;
we accept its dimension once it agrees at P and 2P.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from math import ceil, lcm

from .errors import PrecisionExhausted, SolverError
from .linalg import SparseEchelon
from .tilt import AtLeastP, RingConfig, TiltElement

MAX_EIGEN_ENTRIES = 1 << 16
MAX_FIELD_SIZE = 1 << 16
MAX_COLUMNS = 60000


@dataclass
class FixedSpace:
    """F_p-basis of a solution space together with its certificate."""

    dim: int
    basis: list
    alpha: Fraction
    certified_P: Fraction
    certified_D: int
    config: RingConfig
    dims_by_precision: dict = dc_field(default_factory=dict)
    floor: Fraction = Fraction(0)
    notes: list = dc_field(default_factory=list)
    kind: str = "kernel"


@dataclass
class EigenSet:
    entries: list  # (i, x) pairs
    config: RingConfig

    def __len__(self):
        return len(self.entries)

    @property
    def min_exponent(self) -> Fraction:
        return min(i for i, _ in self.entries)


@dataclass
class VerifyResult:
    passed: bool
    residual: object  # Fraction or AtLeastP

    def __bool__(self):
        return self.passed


def refined_denominator(D: int, p: int, r: int, alpha=None, cap: int = 2) -> int:
    """Grid denominator D * (p-1) * lcm(p^k - 1 : k <= min(r, cap)), also covering alpha."""
    out = D
    if r:
        L = 1
        for k in range(1, min(r, cap) + 1):
            L = lcm(L, p**k - 1)
        out = D * (p - 1) * L
    if alpha is not None:
        out = lcm(out, Fraction(alpha).denominator)
    return out


def _ceil_grid(x: Fraction, D: int) -> Fraction:
    return Fraction(ceil(x * D), D)


def _above(x: Fraction, D: int) -> Fraction:
    """Smallest grid value strictly greater than x."""
    return Fraction((x * D).__floor__() + 1, D)


# -- the linear system ------------------------------------------------------

class _System:
    """Sparse F_p system for sum L a X_u - sum R b sigma(X_u) = 0 mod d^P."""

    def __init__(self, config: RingConfig, n_unknowns: int, left, right):
        self.config = config
        self.U = n_unknowns
        self.left = left
        self.right = right

    def column(self, k: int, u: int, l: int) -> int:
        cfg = self.config
        return ((k - cfg.floor_n) * self.U + u) * cfg.field.m + l

    def decode(self, col: int) -> tuple[int, int, int]:
        cfg = self.config
        m = cfg.field.m
        rest, l = divmod(col, m)
        kk, u = divmod(rest, self.U)
        return kk + cfg.floor_n, u, l

    @property
    def ncols(self) -> int:
        cfg = self.config
        return (cfg.Pn - cfg.floor_n) * self.U * cfg.field.m

    def build(self) -> SparseEchelon:
        cfg = self.config
        F = cfg.field
        p, m = F.p, F.m
        Pn, fl = cfg.Pn, cfg.floor_n
        frob = F.frob_matrix
        rows: dict[tuple[int, int], list[dict[int, int]]] = {}

        def block(key):
            got = rows.get(key)
            if got is None:
                got = rows[key] = [{} for _ in range(m)]
            return got

        def add(key, mat, k, u):
            eq = block(key)
            base = self.column(k, u, 0)
            for i in range(m):
                row = eq[i]
                mi = mat[i]
                for j in range(m):
                    v = mi[j]
                    if v:
                        c = base + j
                        row[c] = (row.get(c, 0) + v) % p

        for o, u, a in self.left:
            for t, c in a.terms.items():
                mat = F.mul_matrix(c)
                for k in range(fl, Pn - t):
                    add((o, k + t), mat, k, u)
        for o, u, b in self.right:
            for t, c in b.terms.items():
                mc = F.mul_matrix(c)
                # -Mul(c) . Frob
                mat = [[(-sum(mc[i][s] * frob[s][j] for s in range(m))) % p for j in range(m)]
                       for i in range(m)]
                k = fl
                while k < Pn and p * k + t < Pn:
                    add((o, p * k + t), mat, k, u)
                    k += 1
        ech = SparseEchelon(p, self.ncols)
        for key in sorted(rows, key=lambda oe: (oe[1], oe[0])):
            for row in rows[key]:
                if row:
                    ech.add_row(row)
        return ech

    def vector(self, assignment: dict[int, int]) -> list:
        """Unknown ring elements of a nullspace vector."""
        cfg = self.config
        F = cfg.field
        m = F.m
        coeffs: dict[tuple[int, int], list[int]] = {}
        for col, v in assignment.items():
            k, u, l = self.decode(col)
            coeffs.setdefault((u, k), [0] * m)[l] = v
        terms = [dict() for _ in range(self.U)]
        for (u, k), vec in coeffs.items():
            code = F.from_coeffs(vec)
            if code:
                terms[u][k] = code
        return [TiltElement(cfg, t) for t in terms]


def _window_solve(system: _System, s_n: int):
    """(dim of window projection, basis of unknown tuples)."""
    ech = system.build()
    fl = system.config.floor_n
    wlim = (s_n - fl) * system.U * system.config.field.m
    free = ech.free_columns(wlim)
    basis = [system.vector(ech.kernel_vector({f: 1})) for f in free]
    return len(free), basis


def _certified(make_system, config: RingConfig, s: Fraction, P0: Fraction, what: str):
    """Solve at P0, 2P0 (and 4P0 if needed) until the window dimension repeats."""
    D = config.D
    s_n = int(s * D)
    dims = {}
    prev = None
    P = P0
    for _ in range(3):
        cfg = config.replace(P=P)
        dim, basis = _window_solve(make_system(cfg), s_n)
        dims[P] = dim
        if prev is not None and prev == dim:
            return dim, basis, cfg, dims
        prev = dim
        P = 2 * P
    raise PrecisionExhausted(
        f"{what}: dimension not stable under doubling the precision "
        f"({', '.join(f'P={k}: {v}' for k, v in dims.items())})"
    )


def _module_at(M, config: RingConfig):
    """Matrix entries of M re-expressed in config (grid refinement, precision, floor)."""
    return [[x.with_config(config) for x in row] for row in M.A]


def _working_config(M, alpha=None, refine=True, D=None) -> RingConfig:
    cfg = M.config
    if D is None:
        D = refined_denominator(cfg.D, cfg.p, M.r, alpha) if refine else cfg.D
        if alpha is not None and not refine:
            if (Fraction(alpha) * D).denominator != 1:
                from .errors import GridError

                raise GridError(f"alpha {alpha} is not on the grid (1/{D})Z")
    if D % cfg.D:
        raise ValueError(f"grid 1/{D} does not refine 1/{cfg.D}")
    return cfg.replace(D=D)


# -- public solvers ---------------------------------------------------------

def fp_kernel(M, alpha, *, refine: bool = True, D: int | None = None, P=None) -> FixedSpace:
    """F_p-basis of Ker(phi - d^alpha) on M, certified by precision doubling."""
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    base = _working_config(M, alpha, refine, D)
    Dw = base.D
    if (alpha * Dw).denominator != 1:
        from .errors import GridError

        raise GridError(f"alpha {alpha} is not on the grid (1/{Dw})Z")
    r = M.r
    s = _above(alpha / (base.p - 1), Dw)
    P0 = max(Fraction(P) if P is not None else M.config.P, _ceil_grid(2 * (s + alpha), Dw))
    if r == 0:
        cfg = base.replace(P=P0)
        return FixedSpace(0, [], alpha, P0, Dw, cfg, {P0: 0})

    def make(cfg):
        A = _module_at(M, cfg)
        left = [(i, i, TiltElement.monomial(cfg, 1, alpha)) for i in range(r)]
        right = [(i, j, A[i][j]) for i in range(r) for j in range(r) if A[i][j]]
        return _System(cfg, r, left, right)

    dim, basis, cfg, dims = _certified(make, base, s, P0, f"Ker(phi - d^{alpha})")
    out = FixedSpace(dim, basis, alpha, cfg.P, Dw, cfg, dims)
    _check_basis(M, out)
    return out


def fp_hom(M, N, *, refine: bool = True, D: int | None = None, P=None) -> FixedSpace:
    """F_p-basis of matrices F (r_N x r_M) with F A_M = A_N sigma(F)."""
    from .phimod import pm_total_slope

    if M.config != N.config:
        from .errors import ConfigMismatch

        raise ConfigMismatch("Hom between modules over different rings")
    rm, rn = M.r, N.r
    base = _working_config(M, None, refine, D) if D is not None or not refine else \
        M.config.replace(D=refined_denominator(M.config.D, M.config.p, max(rm, rn)))
    Dw = base.D
    ts = pm_total_slope(M) if rm else Fraction(0)
    s = _above(ts / (base.p - 1), Dw)
    P0 = max(Fraction(P) if P is not None else M.config.P, _ceil_grid(2 * (s + ts), Dw))
    if rm == 0 or rn == 0:
        cfg = base.replace(P=P0)
        return FixedSpace(0, [], Fraction(0), P0, Dw, cfg, {P0: 0}, kind="hom")

    def make(cfg):
        Am, An = _module_at(M, cfg), _module_at(N, cfg)
        left, right = [], []
        for i in range(rn):
            for k in range(rm):
                o = i * rm + k
                for j in range(rm):
                    if Am[j][k]:
                        left.append((o, i * rm + j, Am[j][k]))
                for j in range(rn):
                    if An[i][j]:
                        right.append((o, j * rm + k, An[i][j]))
        return _System(cfg, rn * rm, left, right)

    dim, flat, cfg, dims = _certified(make, base, s, P0, "Hom")
    basis = [[vec[i * rm:(i + 1) * rm] for i in range(rn)] for vec in flat]
    out = FixedSpace(dim, basis, Fraction(0), cfg.P, Dw, cfg, dims, kind="hom")
    for F in basis:
        res = fp_verify_hom(M, N, F)
        if not res.passed:
            raise SolverError(f"Hom basis element fails substitution (residual {res.residual})")
    return out


def _unit_fixed_once(M, config: RingConfig) -> FixedSpace:
    r = M.r
    P0 = max(M.config.P, _ceil_grid(Fraction(2), config.D))

    def make(cfg):
        A = _module_at(M, cfg)
        one = TiltElement.one(cfg)
        left = [(i, i, one) for i in range(r)]
        right = [(i, j, A[i][j]) for i in range(r) for j in range(r) if A[i][j]]
        return _System(cfg, r, left, right)

    dim, basis, cfg, dims = _certified(make, config, Fraction(1, config.D), P0, "M[1/d]^{phi=1}")
    return FixedSpace(dim, basis, Fraction(0), cfg.P, cfg.D, cfg, dims, floor=cfg.floor,
                      kind="unit_fixed")


def fp_unit_fixed(M, *, max_extension: int = 8, refine: bool = True) -> FixedSpace:
    """Basis of M[1/d]^{phi=1}, escalating floor, coefficient field and grid until dim = r.

    The floor -ceil(TS/(p-1)) - 1 is a heuristic; every attempt is listed
    in ``notes``.
    """
    from .phimod import pm_total_slope

    r = M.r
    p = M.config.p
    ts = pm_total_slope(M) if r else Fraction(0)
    D0 = refined_denominator(M.config.D, p, r) if refine else M.config.D
    fl0 = -ceil(ts / (p - 1)) - 1
    q = M.config.field.q
    degrees = [k for k in range(2, max_extension + 1) if q**k <= MAX_FIELD_SIZE]
    schedule = [(fl0, 1, D0), (2 * fl0, 1, D0)]
    schedule += [(2 * fl0, k, D0) for k in degrees]
    kmax = schedule[-1][1]
    schedule.append((2 * fl0, kmax, 2 * D0))
    if refine and r > 2:
        # isoclinic pieces of height h > 2 need exponents in (1/(p^h - 1))Z
        D1 = refined_denominator(M.config.D, p, r, cap=r)
        for k in [1] + degrees:
            cols = r * M.config.field.m * k * (2 * M.config.P - 2 * fl0) * D1
            if cols <= MAX_COLUMNS:
                schedule.append((2 * fl0, k, D1))
    notes = []
    last = None
    for fl, k, D in schedule:
        Mk = M.extend_field(k) if k > 1 else M
        cfg = Mk.config.replace(D=D, floor=fl)
        try:
            fs = _unit_fixed_once(Mk, cfg)
        except PrecisionExhausted as exc:
            notes.append(f"floor={fl} ext={k} D={D}: {exc}")
            last = (fl, k, D)
            continue
        notes.append(f"floor={fl} ext={k} D={D}: dim={fs.dim}")
        last = (fl, k, D)
        if fs.dim == r:
            fs.notes = notes
            for y in fs.basis:
                res = fp_verify(Mk, 0, y)
                if not res.passed:
                    raise SolverError(f"unit-fixed vector fails substitution (residual {res.residual})")
            return fs
    fl, k, D = last
    raise SolverError(
        f"M[1/d]^(phi=1) has dimension < {r} after the retry budget; last configuration: "
        f"floor={fl}, field degree {M.config.field.m * k}, D={D}"
    )


def _shift_to_primitive(y: list, config: RingConfig):
    """(i, x) with x = d^{i/(p-1)} y primitive, i = -(p-1) minval(y)."""
    p = config.p
    vals = [v.val() for v in y if v]
    mv = min(vals)
    i = -(p - 1) * mv
    target = config.replace(floor=0)
    x = [TiltElement(target, {k: c for k, c in v.shift(-mv).terms.items() if k >= 0})
         if v else TiltElement.zero(target) for v in y]
    return i, x


def fp_eigen_set(M, *, limit: int = MAX_EIGEN_ENTRIES) -> EigenSet:
    """All (i, x) with x primitive and phi(x) = d^i x, via the unit-fixed space."""
    fs = fp_unit_fixed(M)
    p, r = M.config.p, M.r
    if p**r - 1 > limit:
        raise SolverError(f"eigen set has {p**r - 1} entries, above the enumeration limit {limit}")
    cfg = fs.config
    entries = []
    for combo in product(range(p), repeat=r):
        if not any(combo):
            continue
        y = [TiltElement.zero(cfg) for _ in range(r)]
        for c, b in zip(combo, fs.basis):
            if c:
                y = [a + v.scale(c) for a, v in zip(y, b)]
        entries.append(_shift_to_primitive(y, cfg))
    entries.sort(key=lambda e: (e[0], tuple(tuple(sorted(x.terms.items())) for x in e[1])))
    return EigenSet(entries, cfg.replace(floor=0))


def fp_min_eigenvector(M, *, max_extension: int = 8):
    """(i, x, Mx): a primitive eigenvector with the least exponent i.

    Found without enumerating the eigen set: echelonize the low-exponent
    coefficients of the unit-fixed basis with the lowest exponent as the
    leading position; the row whose leading exponent is largest has the
    largest minimal valuation.  Mx is M over the ring where x lives.
    """
    fs = fp_unit_fixed(M, max_extension=max_extension)
    cfg = fs.config
    F = cfg.field
    r = M.r
    rows = []
    for y in fs.basis:
        vec = {}
        for u, v in enumerate(y):
            for k, c in v.terms.items():
                if k <= 0:
                    for l, a in enumerate(F.to_coeffs(c)):
                        if a:
                            # leading position = lowest exponent -> highest column
                            vec[((-cfg.floor_n + 1 - k) * r + (r - 1 - u)) * F.m + (F.m - 1 - l)] = a
        rows.append(vec)
    # reduce with max-column pivots, tracking combinations
    p = F.p
    ech_rows = []  # (pivot, row, combo)
    for idx, vec in enumerate(rows):
        combo = {idx: 1}
        vec = dict(vec)
        changed = True
        while changed:
            changed = False
            for piv, prow, pcombo in ech_rows:
                v = vec.get(piv)
                if v:
                    for c, a in prow.items():
                        nv = (vec.get(c, 0) - v * a) % p
                        if nv:
                            vec[c] = nv
                        else:
                            vec.pop(c, None)
                    for c, a in pcombo.items():
                        combo[c] = (combo.get(c, 0) - v * a) % p
                    changed = True
        piv = max(vec)
        inv = pow(vec[piv], p - 2, p)
        vec = {c: a * inv % p for c, a in vec.items()}
        combo = {c: a * inv % p for c, a in combo.items() if a * inv % p}
        ech_rows.append((piv, vec, combo))
    # smallest leading column = largest leading exponent; tie-break by basis index
    piv, _, combo = min(ech_rows, key=lambda t: (t[0], min(t[2])))
    y = [TiltElement.zero(cfg) for _ in range(r)]
    for idx, c in sorted(combo.items()):
        y = [a + v.scale(c) for a, v in zip(y, fs.basis[idx])]
    i, x = _shift_to_primitive(y, cfg)
    k = cfg.field.m // M.config.field.m
    Mk = M.extend_field(k) if k > 1 else M
    target = cfg.replace(floor=0, P=M.config.P)
    Mx = Mk.with_config(target)
    x = [TiltElement(target, v.terms) for v in x]
    return i, x, Mx


# -- verification oracle ----------------------------------------------------

def _verify_config(x_config: RingConfig) -> RingConfig:
    p = x_config.p
    return x_config.replace(floor=p * x_config.floor)


def _lift_module_matrix(M, config: RingConfig):
    if M.config.field != config.field:
        M = M.extend_field(config.field.m // M.config.field.m)
    return [[x.with_config(config) for x in row] for row in M.A]


def _residual_val(vec):
    vals = [v.val() for v in vec if v]
    if not vals:
        return None
    return min(vals)


def fp_verify(M, alpha, x) -> VerifyResult:
    """Substitute x into A sigma(x) - d^alpha x with plain ring arithmetic.

    Passes iff the residual vanishes modulo d^P (P the precision of x).
    """
    alpha = Fraction(alpha)
    if len(x) != M.r:
        raise ValueError("vector length does not match the rank")
    if M.r == 0:
        return VerifyResult(True, AtLeastP(M.config.P))
    xc = x[0].config
    V = _verify_config(xc)
    A = _lift_module_matrix(M, V)
    xs = [TiltElement(V, v.terms) for v in x]
    sx = [v.frobenius() for v in xs]
    da = TiltElement.monomial(V, 1, alpha)
    res = []
    for i in range(M.r):
        acc = -(da * xs[i])
        for j in range(M.r):
            acc = acc + A[i][j] * sx[j]
        res.append(acc)
    v = _residual_val(res)
    if v is None:
        return VerifyResult(True, AtLeastP(V.P))
    return VerifyResult(False, v)


def fp_verify_hom(M, N, F) -> VerifyResult:
    """Residual of F A_M - A_N sigma(F) by direct ring arithmetic."""
    xc = F[0][0].config
    V = _verify_config(xc)
    Am = _lift_module_matrix(M, V)
    An = _lift_module_matrix(N, V)
    Fv = [[TiltElement(V, v.terms) for v in row] for row in F]
    sF = [[v.frobenius() for v in row] for row in Fv]
    res = []
    for i in range(N.r):
        for k in range(M.r):
            acc = TiltElement.zero(V)
            for j in range(M.r):
                acc = acc + Fv[i][j] * Am[j][k]
            for j in range(N.r):
                acc = acc - An[i][j] * sF[j][k]
            res.append(acc)
    v = _residual_val(res)
    if v is None:
        return VerifyResult(True, AtLeastP(V.P))
    return VerifyResult(False, v)


def _check_basis(M, fs: FixedSpace):
    for vec in fs.basis:
        res = fp_verify(M, fs.alpha, vec)
        if not res.passed:
            raise SolverError(f"basis vector fails substitution (residual {res.residual})")


__all__ = [
    "EigenSet",
    "FixedSpace",
    "VerifyResult",
    "fp_eigen_set",
    "fp_hom",
    "fp_kernel",
    "fp_min_eigenvector",
    "fp_unit_fixed",
    "fp_verify",
    "fp_verify_hom",
    "refined_denominator",
]
