"""Seeded random support families for property checks and the bkk-check command."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .mixed_volume import mixed_volume_ie
from .polytope import LatticePolytope

Support = list[tuple[int, ...]]


def random_support(rng: np.random.Generator, n: int, max_terms: int = 5, max_degree: int = 3,
                   min_terms: int = 2) -> Support:
    """Distinct exponents in [0, max_degree]^n, between min_terms and max_terms of them."""
    cap = min(max_terms, (max_degree + 1) ** n)
    m = int(rng.integers(min(min_terms, cap), cap + 1))
    pts: set[tuple[int, ...]] = set()
    while len(pts) < m:
        pts.add(tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n)))
    return sorted(pts)


def random_model_supports(rng: np.random.Generator, n: int, k: int, max_terms: int = 5,
                          max_degree: int = 3) -> list[Support]:
    return [random_support(rng, n, max_terms, max_degree) for _ in range(k)]


def random_square_supports(seed: int, n: Optional[int] = None, max_n: int = 3, max_terms: int = 5,
                           max_degree: int = 3, max_tries: int = 1000) -> list[Support]:
    """Supports of a square system with positive mixed volume (rejection sampling)."""
    rng = np.random.default_rng([seed, 0xB66])
    dim = int(rng.integers(1, max_n + 1)) if n is None else n
    for _ in range(max_tries):
        supports = [random_support(rng, dim, max_terms, max_degree) for _ in range(dim)]
        if mixed_volume_ie([LatticePolytope(tuple(s)) for s in supports]) > 0:
            return supports
    raise RuntimeError(f"no support family with positive mixed volume in {max_tries} draws")
