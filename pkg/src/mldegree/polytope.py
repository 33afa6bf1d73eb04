"""Exact lattice polytopes.

Convex hulls are computed by a placing (beneath-beyond) construction over
lexicographically sorted points with integer orientation tests. A single
pass yields the exact Euclidean volume (sum of placed simplices), the facet
hyperplanes and therefore the vertex set. Lower-dimensional inputs are
handled by an injective coordinate projection onto their affine hull.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import permutations
from math import factorial, gcd
from typing import Iterable, Sequence

import numpy as np

from . import exact
from .core import SparsePolynomial

Point = tuple[int, ...]


@dataclass(frozen=True)
class _Hull:
    dim: int                          # dimension of the affine hull
    vertices: tuple[Point, ...]
    volume_x_factorial: int           # d! * volume, only meaningful when dim == ambient


def _insertion_order(points: list[Point], d: int) -> list[int]:
    """Points minimising random linear functionals first, then a fixed shuffle of the rest.

    Extreme points early means later interior points are rejected without
    touching the boundary.
    """
    rng = np.random.default_rng(len(points))
    arr = np.array(points, dtype=float)
    dirs = rng.standard_normal((8 * d + 8, d))
    extreme = np.argmin(arr @ dirs.T, axis=0)
    first = list(dict.fromkeys(int(i) for i in extreme))
    seen = set(first)
    rest = [int(i) for i in rng.permutation(len(points)) if int(i) not in seen]
    return first + rest


@lru_cache(maxsize=None)
def _cofactor_tables(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Index and sign tables expanding the generalized cross product in Z^d."""
    perms = list(permutations(range(d - 1)))
    cols = np.empty((d, len(perms), d - 1), dtype=np.intp)
    coef = np.empty((d, len(perms)), dtype=np.int64)
    for j in range(d):
        others = [c for c in range(d) if c != j]
        for s, perm in enumerate(perms):
            cols[j, s] = [others[k] for k in perm]
            inversions = sum(1 for a in range(d - 1) for b in range(a + 1, d - 1) if perm[a] > perm[b])
            coef[j, s] = (-1) ** (d - 1 + j + inversions)
    return cols, coef


def _batch_cross(V: np.ndarray) -> np.ndarray:
    """Generalized cross products of a batch of (d-1) x d integer matrices."""
    d = V.shape[2]
    cols, coef = _cofactor_tables(d)
    rows = np.arange(d - 1)[None, None, :]
    gathered = V[:, rows, cols]                    # (B, d, perms, d-1)
    return (gathered.prod(axis=-1) * coef.astype(V.dtype)).sum(axis=-1)


class _Facets:
    """Growable store of oriented boundary simplices (normal . x >= offset inside)."""

    def __init__(self, pts: np.ndarray, interior: np.ndarray, dtype):
        self.pts = pts
        self.interior = interior      # (d+1) * an interior point
        self.dtype = dtype
        d = pts.shape[1]
        self.d = d
        self.normals = np.zeros((64, d), dtype=dtype)
        self.offsets = np.zeros(64, dtype=dtype)
        self.scales: list[int] = []
        self.alive = np.zeros(64, dtype=bool)
        self.keys: list[tuple[int, ...]] = []

    def __len__(self) -> int:
        return len(self.keys)

    def add(self, keys: list[tuple[int, ...]]) -> None:
        idx = np.array(keys, dtype=np.intp)
        base = self.pts[idx[:, 0]]
        V = self.pts[idx[:, 1:]] - base[:, None, :]
        raw = _batch_cross(V)
        if self.dtype is object:
            g = np.array([_gcd_row(r) for r in raw], dtype=object)
        else:
            g = np.gcd.reduce(raw, axis=1)
        normals = raw // g[:, None]
        offsets = (normals * base).sum(axis=1)
        flip = (normals * self.interior).sum(axis=1) < (self.d + 1) * offsets
        normals[flip] = -normals[flip]
        offsets[flip] = -offsets[flip]
        start = len(self.keys)
        stop = start + len(keys)
        if stop > len(self.alive):
            cap = max(2 * len(self.alive), stop)
            self.normals = np.resize(self.normals, (cap, self.d))
            self.offsets = np.resize(self.offsets, cap)
            alive = np.zeros(cap, dtype=bool)
            alive[:start] = self.alive[:start]
            self.alive = alive
        self.normals[start:stop] = normals
        self.offsets[start:stop] = offsets
        self.alive[start:stop] = True
        self.scales.extend(int(x) for x in g)
        self.keys.extend(keys)

    def visible(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.keys)
        vals = self.normals[:n] @ p
        vis = np.nonzero(self.alive[:n] & (vals < self.offsets[:n]))[0]
        return vis, vals[vis]

    def live(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.alive[:len(self.keys)])[0]]


def _gcd_row(row) -> int:
    g = 0
    for x in row:
        g = gcd(g, int(x))
    return g


def _hull_full(points: list[Point], d: int, simplex: list[int]) -> tuple[list[int], int]:
    """Beneath-beyond for a full-dimensional point set in Z^d.

    ``simplex`` indexes d+1 affinely independent points. Returns the indices
    of the vertices and d! times the volume.
    """
    bound = max(1, max(abs(x) for p in points for x in p))
    # Hadamard bound on facet normal entries times a point coordinate.
    big = d * bound * (2 * bound * d) ** (d - 1)
    dtype = np.int64 if big < 2**62 else object
    pts = np.array(points, dtype=dtype)
    interior = pts[simplex].sum(axis=0)

    store = _Facets(pts, interior, dtype)
    store.add([tuple(sorted(simplex[:k] + simplex[k + 1:])) for k in range(d + 1)])
    volume = abs(exact.det([[points[i][c] - points[simplex[0]][c] for c in range(d)]
                            for i in simplex[1:]]))

    in_simplex = set(simplex)
    for pi in _insertion_order(points, d):
        if pi in in_simplex:
            continue
        vis, vals = store.visible(pts[pi])
        if len(vis) == 0:
            continue
        ridge_count: dict[tuple[int, ...], int] = {}
        for fi, val in zip(vis.tolist(), vals.tolist()):
            key = store.keys[fi]
            volume += store.scales[fi] * (int(store.offsets[fi]) - int(val))
            for k in range(d):
                ridge = key[:k] + key[k + 1:]
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        store.alive[vis] = False
        store.add([tuple(sorted(r + (pi,))) for r, c in ridge_count.items() if c == 1])

    # A point is a vertex iff the normals of the facet hyperplanes through it have full rank.
    live = store.live()
    planes = sorted({(tuple(int(x) for x in store.normals[i]), int(store.offsets[i])) for i in live})
    PN = np.array([pl[0] for pl in planes], dtype=dtype)
    PO = np.array([pl[1] for pl in planes], dtype=dtype)
    on = (pts @ PN.T) == PO[None, :]
    vertices = []
    for pi in sorted({i for f in live for i in store.keys[f]}):
        through = np.nonzero(on[pi])[0]
        if len(through) < d:
            continue
        if exact.int_rank([planes[j][0] for j in through], stop=d) == d:
            vertices.append(pi)
    return vertices, volume


def convex_hull(points: Iterable[Sequence[int]]) -> _Hull:
    pts = sorted({tuple(int(x) for x in p) for p in points})
    if not pts:
        raise ValueError("empty point set")
    d = len(pts[0])
    if len(pts) == 1:
        return _Hull(0, (pts[0],), 0)
    p0 = pts[0]
    diffs = [[p[c] - p0[c] for c in range(d)] for p in pts[1:]]
    chosen = exact.independent_rows(diffs)
    m = len(chosen)
    simplex = [0] + [i + 1 for i in chosen]
    if m == d:
        if d == 1:
            return _Hull(1, (pts[0], pts[-1]), pts[-1][0] - pts[0][0])
        vidx, vol = _hull_full(pts, d, simplex)
        return _Hull(d, tuple(pts[i] for i in vidx), vol)
    # Project onto m coordinates on which the affine hull projects bijectively.
    basis = [diffs[i] for i in chosen]
    cols = exact.independent_rows([[row[c] for row in basis] for c in range(d)])
    proj = [tuple(p[c] for c in cols) for p in pts]
    if m == 1:
        order = sorted(range(len(pts)), key=lambda i: proj[i])
        return _Hull(1, tuple(sorted((pts[order[0]], pts[order[-1]]))), 0)
    vidx, _ = _hull_full(proj, m, simplex)
    return _Hull(m, tuple(sorted(pts[i] for i in vidx)), 0)


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of finitely many lattice points."""

    points: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple(sorted({tuple(int(x) for x in p) for p in self.points}))
        if not pts:
            raise ValueError("a polytope needs at least one point")
        d = len(pts[0])
        if any(len(p) != d for p in pts):
            raise ValueError("points of different dimensions")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]]) -> "LatticePolytope":
        return cls(tuple(tuple(p) for p in points))

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    @cached_property
    def _hull(self) -> _Hull:
        return convex_hull(self.points)

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self._hull.vertices

    @property
    def dim(self) -> int:
        return self._hull.dim

    @property
    def volume(self) -> Fraction:
        return exact_volume(self)

    def vertex_set(self) -> frozenset[Point]:
        return frozenset(self.vertices)

    def reduced(self) -> "LatticePolytope":
        """Same polytope generated by its vertices only."""
        return LatticePolytope(self.vertices)

    def transform(self, matrix: Sequence[Sequence[int]]) -> "LatticePolytope":
        return LatticePolytope(tuple(tuple(sum(r[c] * p[c] for c in range(len(p))) for r in matrix)
                                     for p in self.vertices))

    def translate(self, a: Sequence[int]) -> "LatticePolytope":
        return LatticePolytope(tuple(tuple(x + y for x, y in zip(p, a)) for p in self.vertices))

    def contains_polytope(self, other: "LatticePolytope") -> bool:
        """Exact containment test (every vertex of ``other`` lies in ``self``)."""
        return all(self.contains(v) for v in other.vertices)

    def contains(self, point: Sequence[int]) -> bool:
        hull = LatticePolytope(self.vertices + (tuple(point),))
        return hull.vertex_set() == self.vertex_set()

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticePolytope):
            return NotImplemented
        return self.vertex_set() == other.vertex_set()

    def __hash__(self) -> int:
        return hash(self.vertex_set())

    def __repr__(self) -> str:
        return f"LatticePolytope(vertices={sorted(self.vertices)})"


@dataclass(frozen=True)
class ExposedFace:
    polytope: LatticePolytope
    weight: tuple[int, ...]
    face_vertices: frozenset[Point]
    value: int


def newton_polytope(f: SparsePolynomial) -> LatticePolytope:
    if f.is_zero():
        raise ValueError("the zero polynomial has no Newton polytope")
    return LatticePolytope(tuple(f.terms))


def _dot(w: Sequence[int], p: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(w, p))


def exposed_face(P: LatticePolytope, w: Sequence[int]) -> ExposedFace:
    w = tuple(int(x) for x in w)
    if len(w) != P.ambient_dim:
        raise ValueError("weight vector dimension mismatch")
    if not any(w):
        raise ValueError("zero weight vector")
    vals = {v: _dot(w, v) for v in P.vertices}
    low = min(vals.values())
    return ExposedFace(P, w, frozenset(v for v, x in vals.items() if x == low), low)


def face_value(points: Iterable[Sequence[int]], w: Sequence[int]) -> int:
    return min(_dot(w, p) for p in points)


def initial_polynomial(f: SparsePolynomial, w: Sequence[int]) -> SparsePolynomial:
    """Terms of ``f`` whose exponents lie on the face of Newt(f) exposed by ``w``."""
    if f.is_zero():
        raise ValueError("zero polynomial")
    if not any(w):
        raise ValueError("zero weight vector")
    low = face_value(f.terms, w)
    return SparsePolynomial(f.dim, {a: c for a, c in f.terms.items() if _dot(w, a) == low})


def minkowski_sum(P: LatticePolytope, Q: LatticePolytope) -> LatticePolytope:
    if P.ambient_dim != Q.ambient_dim:
        raise ValueError("dimension mismatch in Minkowski sum")
    pts = {tuple(a + b for a, b in zip(p, q)) for p in P.vertices for q in Q.vertices}
    return LatticePolytope(tuple(pts))


def exact_volume(P: LatticePolytope) -> Fraction:
    d = P.ambient_dim
    hull = P._hull
    if hull.dim < d:
        return Fraction(0)
    return Fraction(hull.volume_x_factorial, factorial(d))


def lattice_volume(P: LatticePolytope) -> int:
    """d! times the Euclidean volume (an integer for lattice polytopes)."""
    hull = P._hull
    return hull.volume_x_factorial if hull.dim == P.ambient_dim else 0
