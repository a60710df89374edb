"""Sparse Gaussian elimination over F_p.

Rows are dicts ``{column: value}``.  Rows are reduced incrementally as they
arrive; each new row picks as pivot its column of highest priority (the
column index itself), so low-index columns only become pivots of rows that
contain nothing else.  This makes the free low columns a parametrization of
the projection of the nullspace onto the low columns.
"""

from __future__ import annotations

import heapq


class SparseEchelon:
    def __init__(self, p: int, ncols: int):
        self.p = p
        self.ncols = ncols
        self.pivot_rows: dict[int, dict[int, int]] = {}
        self.order: dict[int, int] = {}  # pivot column -> insertion index

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    def add_row(self, row: dict[int, int]) -> bool:
        """Reduce ``row`` against the current pivots; returns True if it was independent."""
        p = self.p
        row = {c: v % p for c, v in row.items() if v % p}
        heap = [(self.order[c], c) for c in row if c in self.order]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            v = row.get(c)
            if not v:
                continue
            prow = self.pivot_rows[c]
            for cc, pv in prow.items():
                nv = (row.get(cc, 0) - v * pv) % p
                if nv:
                    if cc not in row and cc in self.order:
                        heapq.heappush(heap, (self.order[cc], cc))
                    row[cc] = nv
                else:
                    row.pop(cc, None)
        if not row:
            return False
        piv = max(row)
        inv = pow(row[piv], p - 2, p)
        if inv != 1:
            row = {c: v * inv % p for c, v in row.items()}
        self.order[piv] = len(self.order)
        self.pivot_rows[piv] = row
        return True

    def free_columns(self, limit: int | None = None) -> list[int]:
        n = self.ncols if limit is None else limit
        return [c for c in range(n) if c not in self.pivot_rows]

    def kernel_vector(self, assignment: dict[int, int]) -> dict[int, int]:
        """Kernel vector with the given free-column values (others zero).

        Pivot values are solved in reverse insertion order: a pivot row only
        mentions free columns and pivots of rows inserted after it.
        """
        p = self.p
        x = {c: v % p for c, v in assignment.items() if v % p}
        for c in sorted(self.order, key=self.order.__getitem__, reverse=True):
            row = self.pivot_rows[c]
            acc = 0
            for cc, v in row.items():
                if cc != c:
                    xv = x.get(cc)
                    if xv:
                        acc += v * xv
            acc %= p
            if acc:
                x[c] = (-acc) % p
        return x


def nullspace_dense(rows: list[list[int]], p: int) -> list[list[int]]:
    """Nullspace basis of a small dense matrix over F_p (reference oracle use)."""
    if not rows:
        return []
    ncols = len(rows[0])
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [v * inv % p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-m[i][f]) % p
        basis.append(v)
    return basis


def rank_dense(rows: list[list[int]], p: int) -> int:
    if not rows:
        return 0
    return len(rows[0]) - len(nullspace_dense(rows, p))
