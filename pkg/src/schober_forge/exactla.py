"""Dense exact-rational linear algebra: just enough for the AR engine."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

Matrix = list[list[Fraction]]


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def from_rows(rows: Sequence[Sequence[int | Fraction]]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def shape(m: Matrix) -> tuple[int, int]:
    return (len(m), len(m[0]) if m else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {shape(a)} x {shape(b)}")
    out = zeros(ra, cb)
    for i in range(ra):
        arow = a[i]
        orow = out[i]
        for k in range(ca):
            x = arow[k]
            if not x:
                continue
            brow = b[k]
            for j in range(cb):
                if brow[j]:
                    orow[j] += x * brow[j]
    return out


def madd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(a: Matrix, c: Fraction | int) -> Matrix:
    c = Fraction(c)
    return [[c * x for x in row] for row in a]


def mneg(a: Matrix) -> Matrix:
    return mscale(a, -1)


def is_zero_matrix(a: Matrix) -> bool:
    return all(not x for row in a for x in row)


def transpose(a: Matrix) -> Matrix:
    r, c = shape(a)
    return [[a[i][j] for i in range(r)] for j in range(c)]


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref, pivot column list)."""
    a = [row[:] for row in m]
    rows, cols = shape(a)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c]), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = Fraction(1) / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def nullspace(m: Matrix) -> list[list[Fraction]]:
    """Basis of the right nullspace, deterministic from the RREF."""
    rows, cols = shape(m)
    if cols == 0:
        return []
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = []
    for f in free:
        vec = [Fraction(0)] * cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r][f]
        basis.append(vec)
    return basis


def solve(a: Matrix, b: list[Fraction]) -> Optional[list[Fraction]]:
    """One solution of a x = b, or None if inconsistent."""
    rows, cols = shape(a)
    aug = [a[i][:] + [Fraction(b[i])] for i in range(rows)]
    reduced, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for r, p in enumerate(pivots):
        x[p] = reduced[r][cols]
    return x


class SubspaceBasis:
    """Incremental RREF-maintained basis of a subspace of Q^n.

    Supports membership, coordinates with respect to the inserted spanning
    vectors, and deterministic iteration.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def _reduce(self, vec: Sequence[Fraction]) -> list[Fraction]:
        v = [Fraction(x) for x in vec]
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                f = v[p]
                v = [x - f * y for x, y in zip(v, row)]
        return v

    def contains(self, vec: Sequence[Fraction]) -> bool:
        return all(not x for x in self._reduce(vec))

    def add(self, vec: Sequence[Fraction]) -> bool:
        """Insert vec; returns True if it enlarged the span."""
        v = self._reduce(vec)
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            return False
        inv = Fraction(1) / v[lead]
        v = [x * inv for x in v]
        for row, p in zip(self.rows, self.pivots):
            if row[lead]:
                f = row[lead]
                row[:] = [x - f * y for x, y in zip(row, v)]
        self.rows.append(v)
        self.pivots.append(lead)
        order = sorted(range(len(self.pivots)), key=lambda i: self.pivots[i])
        self.rows = [self.rows[i] for i in order]
        self.pivots = [self.pivots[i] for i in order]
        return True

    def rank(self) -> int:
        return len(self.rows)

    def coordinates(self, vec: Sequence[Fraction]) -> Optional[list[Fraction]]:
        """Coordinates of vec in the current (RREF) basis rows, or None."""
        v = [Fraction(x) for x in vec]
        coords = []
        for row, p in zip(self.rows, self.pivots):
            c = v[p]
            coords.append(c)
            if c:
                v = [x - c * y for x, y in zip(v, row)]
        if any(v):
            return None
        return coords


def vectorize(m: Matrix) -> list[Fraction]:
    return [x for row in m for x in row]


def unvectorize(vec: Sequence[Fraction], rows: int, cols: int) -> Matrix:
    it = iter(vec)
    return [[next(it) for _ in range(cols)] for _ in range(rows)]
