"""Exact integer and rational linear algebra.

Everything here works on plain Python ``int`` / :class:`fractions.Fraction`
so that geometric predicates never see a rounding error. Matrices are lists
of rows. Sizes are tiny (dimension at most a handful), so the algorithms are
the textbook ones.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

IntMatrix = list[list[int]]


def det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss fraction-free elimination)."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            a = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - a * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def rank(rows: Sequence[Sequence[int | Fraction]]) -> int:
    """Rank of a rational matrix."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def int_rank(rows: Sequence[Sequence[int]], stop: Optional[int] = None) -> int:
    """Rank of an integer matrix by fraction-free elimination; may stop early at ``stop``."""
    pending = [list(r) for r in rows if any(r)]
    basis: list[tuple[int, list[int]]] = []
    for v in pending:
        for p, b in basis:
            if v[p]:
                a, c = v[p], b[p]
                v = [x * c - y * a for x, y in zip(v, b)]
        p = next((j for j, x in enumerate(v) if x), None)
        if p is not None:
            v = primitive(v)[0]
            basis.append((p, v))
            if stop is not None and len(basis) >= stop:
                break
    return len(basis)


def independent_rows(rows: Sequence[Sequence[int]]) -> list[int]:
    """Indices of a greedy (first-come) maximal independent subset of rows."""
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    chosen = []
    for idx, row in enumerate(rows):
        v = [Fraction(x) for x in row]
        for b, p in zip(basis, pivots):
            if v[p] != 0:
                f = v[p] / b[p]
                v = [a - f * c for a, c in zip(v, b)]
        p = next((j for j, x in enumerate(v) if x != 0), None)
        if p is not None:
            basis.append(v)
            pivots.append(p)
            chosen.append(idx)
    return chosen


def primitive(vector: Sequence[int]) -> tuple[list[int], int]:
    """Divide an integer vector by the gcd of its entries; return (vector, gcd)."""
    g = 0
    for x in vector:
        g = gcd(g, x)
    if g == 0:
        return list(vector), 0
    return [x // g for x in vector], g


def cross(vectors: Sequence[Sequence[int]]) -> list[int]:
    """Generalized cross product of d-1 integer vectors in Z^d.

    The result ``n`` satisfies ``n . v == det([vectors..., v])`` for every v.
    """
    d = len(vectors) + 1
    out = []
    for j in range(d):
        minor = [[row[c] for c in range(d) if c != j] for row in vectors]
        out.append((-1) ** (d - 1 + j) * det(minor))
    return out


def hermite(matrix: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form of a nonsingular square integer matrix.

    Returns ``(H, U)`` with ``U @ matrix == H``, ``U`` unimodular and ``H``
    upper triangular with positive diagonal.
    """
    n = len(matrix)
    h = [list(row) for row in matrix]
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    for c in range(n):
        # Euclid on column c among rows c..n-1 using unimodular row operations.
        while True:
            nonzero = [i for i in range(c, n) if h[i][c] != 0]
            if not nonzero:
                raise ValueError("singular matrix")
            p = min(nonzero, key=lambda i: abs(h[i][c]))
            if p != c:
                h[c], h[p] = h[p], h[c]
                u[c], u[p] = u[p], u[c]
            done = True
            for i in range(c + 1, n):
                if h[i][c] != 0:
                    q = h[i][c] // h[c][c]
                    h[i] = [a - q * b for a, b in zip(h[i], h[c])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[c])]
                    if h[i][c] != 0:
                        done = False
            if done:
                break
        if h[c][c] < 0:
            h[c] = [-a for a in h[c]]
            u[c] = [-a for a in u[c]]
        for i in range(c):
            q = h[i][c] // h[c][c]
            if q:
                h[i] = [a - q * b for a, b in zip(h[i], h[c])]
                u[i] = [a - q * b for a, b in zip(u[i], u[c])]
    return h, u


def lcm_denominators(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        den = v.denominator
        out = out * den // gcd(out, den)
    return out


def integer_row(values: Sequence[Fraction]) -> list[int]:
    """Positive multiple of a rational vector with coprime integer entries."""
    m = lcm_denominators(values)
    ints = [int(v * m) for v in values]
    return primitive(ints)[0] if any(ints) else ints


class AffineParam:
    """Affine parametrisation ``w = base + basis @ z`` of a rational affine subspace.

    Starts as all of Q^d and shrinks one linear equation at a time.
    """

    __slots__ = ("base", "basis")

    def __init__(self, base: list[Fraction], basis: list[list[Fraction]]):
        self.base = base
        self.basis = basis  # d rows, one column per free parameter

    @classmethod
    def full(cls, d: int) -> "AffineParam":
        return cls([Fraction(0)] * d, [[Fraction(int(i == j)) for j in range(d)] for i in range(d)])

    @property
    def free(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    def restrict(self, row: Sequence[int], rhs: Fraction | int) -> Optional["AffineParam"]:
        """Intersect with ``row . w == rhs``. Returns None if empty.

        A redundant equation returns the parametrisation unchanged.
        """
        k = self.free
        g = [sum((row[i] * self.basis[i][j] for i in range(len(row))), Fraction(0)) for j in range(k)]
        r = Fraction(rhs) - sum((row[i] * self.base[i] for i in range(len(row))), Fraction(0))
        piv = next((j for j in range(k) if g[j] != 0), None)
        if piv is None:
            return self if r == 0 else None
        # z_piv = (r - sum_{j != piv} g_j z_j) / g_piv
        base = [self.base[i] + self.basis[i][piv] * r / g[piv] for i in range(len(self.base))]
        basis = []
        for i in range(len(self.base)):
            bi = self.basis[i]
            basis.append([bi[j] - bi[piv] * g[j] / g[piv] for j in range(k) if j != piv])
        return AffineParam(base, basis)

    def point(self, z: Sequence[Fraction] | None = None) -> list[Fraction]:
        if z is None:
            return list(self.base)
        return [self.base[i] + sum((b * zj for b, zj in zip(self.basis[i], z)), Fraction(0))
                for i in range(len(self.base))]

    def pullback(self, row: Sequence[int], rhs: Fraction | int) -> tuple[list[Fraction], Fraction]:
        """Express ``row . w >= rhs`` as ``g . z >= h`` in the free parameters."""
        g = [sum((row[i] * self.basis[i][j] for i in range(len(row))), Fraction(0)) for j in range(self.free)]
        h = Fraction(rhs) - sum((row[i] * self.base[i] for i in range(len(row))), Fraction(0))
        return g, h


def feasible_point(rows: Sequence[Sequence[Fraction | int]],
                   rhs: Sequence[Fraction | int]) -> Optional[list[Fraction]]:
    """Exact feasibility of ``{z : rows @ z >= rhs}`` with z free.

    Returns a feasible point or None. Uses a phase-one simplex on integer
    tableau rows (each row stored up to a positive factor) with Bland's rule,
    so it terminates and never rounds.
    """
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * (len(rows[0]) if rows else 0)
    k = len(rows[0])
    if k == 0:
        return [] if all(Fraction(h) <= 0 for h in rhs) else None
    if k == 1:
        return _interval_point(rows, rhs)

    # Scale each constraint to integers.
    G: list[list[int]] = []
    H: list[int] = []
    for g, h in zip(rows, rhs):
        vals = [Fraction(x) for x in g] + [Fraction(h)]
        mult = lcm_denominators(vals)
        G.append([int(x * mult) for x in vals[:-1]])
        H.append(int(vals[-1] * mult))

    if max(H) <= 0:
        return [Fraction(0)] * k

    # Columns: z+ (k), z- (k), s (m), t (1). Constraint i:
    #   -G_i z+ + G_i z- + s_i - t = -H_i
    ncol = 2 * k + m + 1
    t_col = ncol - 1
    tab: list[list[int]] = []
    for i in range(m):
        row = [-a for a in G[i]] + list(G[i]) + [0] * m + [-1, -H[i]]
        row[2 * k + i] = 1
        tab.append(row)
    basis = [2 * k + i for i in range(m)]

    def pivot(r: int, q: int) -> None:
        prow = tab[r]
        if prow[q] < 0:
            prow = [-a for a in prow]
        tab[r] = prow
        p = prow[q]
        for i in range(len(tab)):
            if i == r:
                continue
            row = tab[i]
            a = row[q]
            if a == 0:
                continue
            new = [x * p - a * y for x, y in zip(row, prow)]
            g = 0
            for x in new:
                g = gcd(g, x)
                if g == 1:
                    break
            if g > 1:
                new = [x // g for x in new]
            tab[i] = new
        basis[r] = q

    r0 = max(range(m), key=lambda i: H[i])
    pivot(r0, t_col)
    # Objective row: minimise t, i.e. reduced costs of "t" expressed via row r0.
    # obj row (scaled) = e_t - row_r0 / coef, kept as integers.
    prow = tab[r0]
    c = prow[t_col]
    obj = [-x for x in prow]
    obj[t_col] += c
    tab.append(obj)  # last row is the objective; obj[-1] = -t_value * c
    nrows = m

    while True:
        obj = tab[-1]
        if basis.count(t_col) == 0:
            break
        tr = basis.index(t_col)
        if tab[tr][-1] == 0:
            break
        q = next((j for j in range(ncol) if obj[j] < 0), None)
        if q is None:
            return None
        best = None
        for i in range(nrows):
            a = tab[i][q]
            if a <= 0:
                continue
            if best is None:
                best = i
                continue
            # Compare rhs_i / a vs rhs_best / a_best (Bland tie-break on basis index).
            lhs = tab[i][-1] * tab[best][q]
            rhs_ = tab[best][-1] * a
            if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[best]):
                best = i
        if best is None:
            return None  # unbounded direction for t decrease cannot happen; be safe
        pivot(best, q)

    z = [Fraction(0)] * k
    for i, col in enumerate(basis):
        if col < 2 * k:
            val = Fraction(tab[i][-1], tab[i][col])
            if col < k:
                z[col] += val
            else:
                z[col - k] -= val
    return z


def _interval_point(rows, rhs) -> Optional[list[Fraction]]:
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    for g, h in zip(rows, rhs):
        g0 = Fraction(g[0])
        h = Fraction(h)
        if g0 > 0:
            v = h / g0
            lo = v if lo is None or v > lo else lo
        elif g0 < 0:
            v = h / g0
            hi = v if hi is None or v < hi else hi
        elif h > 0:
            return None
    if lo is not None and hi is not None:
        return [lo] if lo <= hi else None
    if lo is not None:
        return [lo]
    if hi is not None:
        return [hi]
    return [Fraction(0)]
