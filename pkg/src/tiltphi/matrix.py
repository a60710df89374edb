"""Dense matrices over the truncated ring (lists of rows of TiltElement)."""

from __future__ import annotations

from itertools import combinations, permutations

from .errors import NotAUnit, PrecisionExhausted
from .tilt import RingConfig, TiltElement

Matrix = list  # list[list[TiltElement]]


def zeros(config: RingConfig, rows: int, cols: int) -> Matrix:
    return [[TiltElement.zero(config) for _ in range(cols)] for _ in range(rows)]


def identity(config: RingConfig, n: int) -> Matrix:
    out = zeros(config, n, n)
    for i in range(n):
        out[i][i] = TiltElement.one(config)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k = len(a), len(b)
    cols = len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(cols):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                if a[i][t] and b[t][j]:
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Matrix, v: list) -> list:
    return [sum((a[i][j] * v[j] for j in range(1, len(v))), a[i][0] * v[0]) for i in range(len(a))]


def mat_frob(a: Matrix) -> Matrix:
    return [[x.frobenius() for x in row] for row in a]


def mat_map(a: Matrix, fn) -> Matrix:
    return [[fn(x) for x in row] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def det_leibniz(a: Matrix) -> TiltElement:
    """Determinant by the permutation expansion; exact mod d^P, no division."""
    n = len(a)
    if n == 0:
        raise ValueError("empty matrix")
    config = a[0][0].config
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    acc = TiltElement.zero(config)
    for perm in permutations(range(n)):
        term = TiltElement.one(config)
        for i, j in enumerate(perm):
            if not a[i][j]:
                term = None
                break
            term = term * a[i][j]
        if term is None or not term:
            continue
        acc = acc - term if _parity(perm) else acc + term
    return acc


def det_laplace(a: Matrix) -> TiltElement:
    """Cofactor expansion along the first row, skipping zero entries."""
    n = len(a)
    if n <= 2:
        return det_leibniz(a)
    config = a[0][0].config
    acc = TiltElement.zero(config)
    for j in range(n):
        if not a[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * det_laplace(minor)
        acc = acc - term if j % 2 else acc + term
    return acc


def _parity(perm) -> int:
    perm = list(perm)
    parity = 0
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            parity ^= 1
    return parity


def mat_inverse(a: Matrix) -> Matrix:
    """Inverse of a matrix whose determinant is a unit (Gauss-Jordan on unit pivots)."""
    n = len(a)
    config = a[0][0].config
    work = [list(row) + ident for row, ident in zip(a, identity(config, n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col].is_unit()), None)
        if piv is None:
            raise NotAUnit("matrix is not invertible over the ring")
        work[col], work[piv] = work[piv], work[col]
        inv = work[col][col].invert_unit()
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


def block_diag(a: Matrix, b: Matrix, config: RingConfig) -> Matrix:
    ra, rb = len(a), len(b)
    out = zeros(config, ra + rb, ra + rb)
    for i in range(ra):
        for j in range(ra):
            out[i][j] = a[i][j]
    for i in range(rb):
        for j in range(rb):
            out[ra + i][ra + j] = b[i][j]
    return out


def kronecker(a: Matrix, b: Matrix) -> Matrix:
    ra, rb = len(a), len(b)
    out = []
    for i in range(ra):
        for k in range(rb):
            out.append([a[i][j] * b[k][l] for j in range(ra) for l in range(rb)])
    return out


def compound(a: Matrix, k: int, config: RingConfig) -> Matrix:
    """k-th compound matrix: rows/columns indexed by sorted k-subsets, entries minors."""
    n = len(a)
    subsets = list(combinations(range(n), k))
    if k == 0:
        return identity(config, 1)
    out = []
    for rows in subsets:
        out.append([det_laplace([[a[i][j] for j in cols] for i in rows]) for cols in subsets])
    return out


def valuation_of_det(a: Matrix) -> tuple:
    """d-adic valuation of det(a) by column-pivoted elimination with precision tracking.

    Returns (valuation, absolute precision at which it is certified).  Pivots
    are chosen per column (minimal valuation in the column), so precision is
    lost whenever the pivot row carries entries of smaller valuation.
    """
    from fractions import Fraction

    n = len(a)
    config = a[0][0].config
    D = config.D
    prec_n = config.Pn
    work = [list(row) for row in a]
    total = 0
    for col in range(n):
        best, best_v = None, None
        for r in range(col, n):
            v = work[r][col].val_num()
            if v is not None and v < prec_n and (best_v is None or v < best_v):
                best, best_v = r, v
        if best is None:
            raise PrecisionExhausted(
                f"determinant vanishes modulo d^{Fraction(prec_n, D)}; raise the precision"
            )
        work[col], work[best] = work[best], work[col]
        total += best_v
        piv = work[col][col]
        unit_inv = piv.shift(Fraction(-best_v, D)).invert_unit()
        row_min = min((x.val_num() for x in work[col][col + 1:] if x), default=best_v)
        # multipliers are known mod d^(prec - best_v); the products with
        # the pivot row are then good to prec - best_v + row_min
        loss = max(0, best_v - row_min)
        for r in range(col + 1, n):
            if not work[r][col]:
                continue
            f = work[r][col].shift(Fraction(-best_v, D)) * unit_inv
            work[r] = [x - f * y for x, y in zip(work[r], work[col])]
        prec_n -= loss
    return Fraction(total, D), Fraction(prec_n, D)
