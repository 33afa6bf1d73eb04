"""Mixed volumes of lattice polytopes.

Two independent engines:

* :func:`mixed_volume_ie` -- inclusion-exclusion over exact volumes of
  Minkowski sums, which extracts the coefficient of mu_1...mu_d in
  vol(mu_1 K_1 + ... + mu_d K_d).
* :func:`mixed_cells` -- random integer lifting and enumeration of the fine
  mixed cells of the induced subdivision; the sum of their determinants is
  the same number, and the cells seed polyhedral homotopy start systems.

:func:`mixed_volume_cross_check` runs both and refuses to answer when they
disagree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Optional, Sequence

import numpy as np

from . import exact
from .polytope import LatticePolytope, lattice_volume, minkowski_sum

logger = logging.getLogger(__name__)

LIFT_RANGE = 2**16
DESK_DIMENSION = 6


class MixedVolumeDisagreement(RuntimeError):
    """The two mixed-volume engines returned different values (a bug, never resolved silently)."""


class FinenessError(RuntimeError):
    """No lifting within the retry budget induced a fine mixed subdivision."""

    def __init__(self, message: str, lifting=None):
        super().__init__(message)
        self.lifting = lifting


def _as_points(support) -> list[tuple[int, ...]]:
    pts = getattr(support, "exponents", support)
    return [tuple(int(x) for x in p) for p in pts]


def mixed_volume_ie(polytopes: Sequence[LatticePolytope]) -> int:
    """Mixed volume via inclusion-exclusion, normalised so MVol(simplex, ..., simplex) = 1."""
    d = len(polytopes)
    if d == 0:
        raise ValueError("need at least one polytope")
    for P in polytopes:
        if P.ambient_dim != d:
            raise ValueError(f"expected {d} polytopes in dimension {d}, got one in dimension {P.ambient_dim}")
    if d > DESK_DIMENSION:
        logger.warning("inclusion-exclusion in dimension %d needs %d hulls", d, 2**d - 1)
    reduced = [P.reduced() for P in polytopes]
    # sums[mask] is the Minkowski sum over the polytopes in ``mask``.
    sums: dict[int, LatticePolytope] = {}
    total = 0
    for mask in range(1, 2**d):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        sums[mask] = reduced[i] if rest == 0 else minkowski_sum(reduced[i], sums[rest])
        size = bin(mask).count("1")
        sign = -1 if (d - size) % 2 else 1
        total += sign * lattice_volume(sums[mask])
    # lattice_volume carries a factor d!.
    value = Fraction(total, factorial(d))
    if value.denominator != 1 or value < 0:
        raise MixedVolumeDisagreement(f"inclusion-exclusion produced a non-integral value {value}")
    return int(value)


@dataclass(frozen=True)
class MixedCell:
    """One fine mixed cell: an edge from every support plus the certifying inner normal.

    ``edges[i]`` is a pair of indices into support i. The lifted lower face of
    support i with respect to ``(normal, 1)`` is exactly that edge.
    """

    edges: tuple[tuple[int, int], ...]
    normal: tuple[Fraction, ...]
    det: int

    def edge_points(self, supports) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return [(supports[i][a], supports[i][b]) for i, (a, b) in enumerate(self.edges)]

    def to_dict(self, supports=None) -> dict:
        out = {"edges": [list(e) for e in self.edges],
               "normal": [str(x) for x in self.normal],
               "det": self.det}
        if supports is not None:
            out["edge_points"] = [[list(a), list(b)] for a, b in self.edge_points(supports)]
        return out


@dataclass(frozen=True)
class MixedSubdivision:
    supports: tuple[tuple[tuple[int, ...], ...], ...]
    lifting: tuple[tuple[int, ...], ...]
    cells: tuple[MixedCell, ...]
    seed: int
    attempts: int = 1

    @property
    def total(self) -> int:
        return sum(c.det for c in self.cells)

    def lifted_value(self, i: int, j: int, normal: Sequence[Fraction]) -> Fraction:
        p = self.supports[i][j]
        return sum((Fraction(w) * x for w, x in zip(normal, p)), Fraction(0)) + self.lifting[i][j]


class _NotFine(Exception):
    pass


def _edge_constraints(pts, lift, a: int, b: int):
    """Equation and inequalities on w making {a, b} the lower face of the lifted support.

    Equation: <w, p_b - p_a> = lift_a - lift_b.
    Inequalities: <w, p_r - p_a> >= lift_a - lift_r for every other r.
    """
    pa, pb = pts[a], pts[b]
    eq = ([x - y for x, y in zip(pb, pa)], lift[a] - lift[b])
    ineq = [([x - y for x, y in zip(pts[r], pa)], lift[a] - lift[r])
            for r in range(len(pts)) if r != a and r != b]
    return eq, ineq


def _feasible(param: exact.AffineParam, ineqs) -> bool:
    if param.free == 0:
        w = param.base
        return all(sum((g * x for g, x in zip(row, w)), Fraction(0)) >= h for row, h in ineqs)
    rows, rhs = [], []
    for row, h in ineqs:
        g, hh = param.pullback(row, h)
        if not any(g):
            if hh > 0:
                return False
            continue
        rows.append(g)
        rhs.append(hh)
    return exact.feasible_point(rows, rhs) is not None


def _enumerate_cells(supports, lifting) -> list[MixedCell]:
    d = len(supports)
    # Lower edges of each lifted support on its own.
    edges: list[list[tuple[int, int, tuple, list]]] = []
    for pts, lift in zip(supports, lifting):
        found = []
        for a, b in combinations(range(len(pts)), 2):
            eq, ineq = _edge_constraints(pts, lift, a, b)
            param = exact.AffineParam.full(d).restrict(*eq)
            if param is not None and _feasible(param, ineq):
                found.append((a, b, eq, ineq))
        edges.append(found)
    if any(not e for e in edges):
        return []

    order = sorted(range(d), key=lambda i: (len(edges[i]), i))
    cells: list[MixedCell] = []

    def descend(level: int, param: exact.AffineParam, ineqs: list, chosen: dict):
        if level == d:
            w = param.base
            for i, (a, b) in chosen.items():
                pts, lift = supports[i], lifting[i]
                base = sum((x * y for x, y in zip(w, pts[a])), Fraction(0)) + lift[a]
                for r in range(len(pts)):
                    if r in (a, b):
                        continue
                    val = sum((x * y for x, y in zip(w, pts[r])), Fraction(0)) + lift[r]
                    if val == base:
                        raise _NotFine(f"lifting is not generic: support {i} has a tie")
            mat = [[x - y for x, y in zip(supports[i][chosen[i][1]], supports[i][chosen[i][0]])]
                   for i in range(d)]
            det = abs(exact.det(mat))
            if det == 0:
                raise _NotFine("degenerate mixed cell")
            cells.append(MixedCell(tuple(chosen[i] for i in range(d)), tuple(w), det))
            return
        i = order[level]
        for a, b, eq, ineq in edges[i]:
            sub = param.restrict(*eq)
            if sub is None or sub.free == param.free:
                continue  # inconsistent, or parallel to an earlier edge (zero-volume cell)
            new_ineqs = ineqs + ineq
            if not _feasible(sub, new_ineqs):
                continue
            chosen[i] = (a, b)
            descend(level + 1, sub, new_ineqs, chosen)
            del chosen[i]

    descend(0, exact.AffineParam.full(d), [], {})
    cells.sort(key=lambda c: c.edges)
    return cells


def sample_lifting(supports, rng: np.random.Generator, lift_range: int = LIFT_RANGE) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in rng.integers(0, lift_range, size=len(s))) for s in supports)


def mixed_cells(supports, seed: int, max_attempts: int = 8, lift_range: int = LIFT_RANGE) -> MixedSubdivision:
    """Fine mixed cells of a random regular mixed subdivision of the given supports."""
    supps = tuple(tuple(_as_points(s)) for s in supports)
    d = len(supps)
    if d == 0:
        raise ValueError("need at least one support")
    for s in supps:
        if not s:
            raise ValueError("empty support")
        if any(len(p) != d for p in s):
            raise ValueError(f"expected {d} supports in dimension {d}")
        if len(set(s)) != len(s):
            raise ValueError("duplicate point in support")
    if d > DESK_DIMENSION:
        logger.warning("mixed cell enumeration in dimension %d beyond desk scale", d)
    rng = np.random.default_rng([seed, 0x11F7])
    lifting = None
    for attempt in range(1, max_attempts + 1):
        lifting = sample_lifting(supps, rng, lift_range)
        try:
            cells = _enumerate_cells(supps, lifting)
        except _NotFine as exc:
            logger.info("lifting attempt %d rejected: %s", attempt, exc)
            continue
        return MixedSubdivision(supps, lifting, tuple(cells), seed, attempt)
    raise FinenessError(f"no fine lifting found in {max_attempts} attempts", lifting)


def mixed_volume_cross_check(polytopes: Optional[Sequence[LatticePolytope]], supports, seed: int) -> int:
    """Run both engines; return their common value or raise MixedVolumeDisagreement."""
    if polytopes is None:
        polytopes = [LatticePolytope(tuple(_as_points(s))) for s in supports]
    ie = mixed_volume_ie(polytopes)
    cells = mixed_cells(supports, seed)
    if cells.total != ie:
        raise MixedVolumeDisagreement(
            f"inclusion-exclusion gives {ie} but mixed cells give {cells.total} (seed {seed})")
    return ie


def mixed_volume(supports, method: str = "ie", seed: int = 0) -> int:
    """Convenience front end taking supports (lists of lattice points)."""
    polys = [LatticePolytope(tuple(_as_points(s))) for s in supports]
    if method == "ie":
        return mixed_volume_ie(polys)
    if method == "cells":
        return mixed_cells(supports, seed).total
    if method == "both":
        return mixed_volume_cross_check(polys, supports, seed)
    raise ValueError(f"unknown method {method!r}")
