"""The Lagrange likelihood (ML) system of a sparse model and its mixed volume.

For a model F = <f_1, ..., f_k> in x_1..x_n and data u, the ML system lives
in the variables (x_1, ..., x_n, lambda_1, ..., lambda_k), in that order, and
consists of

    l_i = u_i - sum_j lambda_j * x_i * df_j/dx_i,   i = 1..n
    f_j,                                            j = 1..k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Coefficient,
    DataVector,
    PolynomialSystem,
    SparsePolynomial,
    multiply_by_full_monomial,
    partial_derivative,
    unit_circle,
)
from .mixed_volume import DESK_DIMENSION, mixed_cells, mixed_volume_cross_check, mixed_volume_ie
from .polytope import LatticePolytope, newton_polytope

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MLSystem:
    equations: tuple[SparsePolynomial, ...]
    n: int
    k: int
    u: DataVector
    source: PolynomialSystem

    @property
    def dim(self) -> int:
        return self.n + self.k

    @property
    def likelihood_equations(self) -> tuple[SparsePolynomial, ...]:
        return self.equations[: self.n]

    @property
    def model_equations(self) -> tuple[SparsePolynomial, ...]:
        return self.equations[self.n:]

    def as_system(self) -> PolynomialSystem:
        return PolynomialSystem(self.equations, self.dim)

    def newton_polytopes(self) -> list[LatticePolytope]:
        return [newton_polytope(g) for g in self.equations]

    @property
    def supports(self) -> list[list[tuple[int, ...]]]:
        return [g.support for g in self.equations]

    def variable_names(self) -> list[str]:
        return [f"x{i + 1}" for i in range(self.n)] + [f"lambda{j + 1}" for j in range(self.k)]


def _unit(dim: int, i: int) -> tuple[int, ...]:
    return tuple(int(c == i) for c in range(dim))


def build_ml_system(F: PolynomialSystem, u: DataVector) -> MLSystem:
    n, k = F.n, F.k
    if len(u) != n:
        raise ValueError(f"data vector has length {len(u)}, expected n={n}")
    d = n + k
    zero = (0,) * d
    likelihood = []
    for i in range(n):
        terms: dict[tuple[int, ...], Coefficient] = {zero: u.coefficient(i)}
        for j, f in enumerate(F):
            # lambda_j * x_i * df_j/dx_i keeps the exponents of f_j with alpha_i > 0.
            g = partial_derivative(f, i + 1).shift(_unit(n, i)).embed(d).shift(_unit(d, n + j))
            for alpha, c in g.terms.items():
                terms[alpha] = -c
        likelihood.append(SparsePolynomial(d, terms))
    model = [f.embed(d) for f in F]
    return MLSystem(tuple(likelihood + model), n, k, u, F)


def ml_degree_mixed_volume(F: PolynomialSystem, u: Optional[DataVector] = None, seed: int = 0,
                           method: str = "both") -> int:
    """ML degree as the mixed volume of the Newton polytopes of the ML system."""
    if u is None:
        u = DataVector((1.0,) * F.n)
    if F.k > F.n:
        logger.warning("k=%d > n=%d: the model is generically empty, ML degree 0", F.k, F.n)
        return 0
    ml = build_ml_system(F, u)
    if ml.dim > DESK_DIMENSION:
        logger.warning("ML system has %d variables, beyond the desk-scale bound %d", ml.dim, DESK_DIMENSION)
    if method == "ie":
        return mixed_volume_ie(ml.newton_polytopes())
    if method == "cells":
        return mixed_cells(ml.supports, seed).total
    if method == "both":
        return mixed_volume_cross_check(ml.newton_polytopes(), ml.supports, seed)
    raise ValueError(f"unknown method {method!r}")


def lambda_rescale(point: Sequence[complex], n: int, direction: str = "forward") -> np.ndarray:
    """Map solutions of L(F) to solutions of L(F-hat) ("forward") and back ("inverse").

    Forward divides each lambda_j by x_1...x_n; inverse multiplies.
    """
    p = np.asarray(point, dtype=complex)
    if np.any(p == 0):
        raise ValueError("point has a zero coordinate; it is not in the torus")
    prod = np.prod(p[:n])
    out = p.copy()
    if direction == "forward":
        out[n:] = p[n:] / prod
    elif direction == "inverse":
        out[n:] = p[n:] * prod
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return out


def shear_matrix(n: int, k: int) -> list[list[int]]:
    """The unimodular block matrix [[I_n, ones(n, k)], [0, I_k]]."""
    d = n + k
    return [[1 if (r == c or (r < n <= c)) else 0 for c in range(d)] for r in range(d)]


def shear_polytopes(ml: MLSystem) -> list[LatticePolytope]:
    phi = shear_matrix(ml.n, ml.k)
    return [P.transform(phi) for P in ml.newton_polytopes()]


def rescale_for_simplex_constraint(F: PolynomialSystem, seed: int) -> PolynomialSystem:
    """Substitute x_i -> t_i x_i for random unit-modulus t_i.

    Supports are unchanged; coefficients become generic multiples of the
    originals, which is what makes a sum-to-one constraint usable.
    """
    rng = np.random.default_rng([seed, 0x5CA1E])
    t = unit_circle(rng, F.n)
    polys = []
    for f in F:
        terms = {}
        for alpha, c in f.terms.items():
            factor = complex(np.prod(t ** np.array(alpha)))
            terms[alpha] = Coefficient(c.value * factor)
        polys.append(SparsePolynomial(F.n, terms))
    return PolynomialSystem(tuple(polys), F.n)


def hat(F: PolynomialSystem) -> PolynomialSystem:
    return multiply_by_full_monomial(F)
