"""Exposed faces of the likelihood polytope of a hat-form ML system.

When x_1...x_n divides every f_j, all the likelihood equations share one
Newton polytope P = conv({0} u vertices of lambda_j f_j). A weight
w = (a, b) in Z^n x Z^k exposes P on one of three kinds of face, decided by
the numbers gamma_j = b_j + val_a(f_j):

* ``ORIGIN`` -- every gamma_j > 0; the face is the origin.
* ``PURE`` -- the minimum gamma is negative; the face is the convex hull of
  e_j + Newt_w(f_j) over the indices attaining it.
* ``MIXED`` -- the minimum gamma is zero; the same hull together with the
  origin. Such faces come with an integer left-kernel certificate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .core import SparsePolynomial, is_hat_form
from .ml_system import MLSystem
from .polytope import LatticePolytope, exposed_face, face_value, initial_polynomial


class Case(enum.IntEnum):
    ORIGIN = 1
    PURE = 2
    MIXED = 3


@dataclass(frozen=True)
class FaceCase:
    case: Case
    active: tuple[int, ...]          # indices j (0-based) attaining the minimum
    gamma: Optional[int]             # common value on active indices; None for ORIGIN
    values: tuple[int, ...]          # gamma_j for every j
    weight: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.active)

    def to_dict(self) -> dict:
        return {"w": list(self.weight), "case": int(self.case), "t": self.t if self.case != Case.ORIGIN else 0,
                "gamma": self.gamma, "active": [j + 1 for j in self.active]}


@dataclass(frozen=True)
class KernelCertificate:
    vector: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def matrix_shape(self) -> tuple[int, int]:
        return len(self.matrix), len(self.matrix[0]) if self.matrix else 0

    def verify(self) -> bool:
        if not any(self.vector):
            return False
        cols = len(self.matrix[0])
        return all(sum(v * row[c] for v, row in zip(self.vector, self.matrix)) == 0 for c in range(cols))


class CertificateError(RuntimeError):
    """A kernel certificate failed exact verification."""


def _split(ml: MLSystem, w: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    w = tuple(int(x) for x in w)
    if len(w) != ml.dim:
        raise ValueError(f"weight vector has length {len(w)}, expected {ml.dim}")
    if not any(w):
        raise ValueError("zero weight vector")
    return w[: ml.n], w[ml.n:]


def _require_hat(ml: MLSystem) -> None:
    if not is_hat_form(ml.source):
        raise ValueError("classification needs a hat-form system (x1*...*xn must divide every f_j)")


def likelihood_polytope(ml: MLSystem) -> LatticePolytope:
    """The common Newton polytope of the likelihood equations."""
    return LatticePolytope(tuple(ml.equations[0].terms))


def classify_face(ml: MLSystem, w: Sequence[int]) -> FaceCase:
    _require_hat(ml)
    a, b = _split(ml, w)
    values = tuple(b[j] + face_value(f.terms, a) for j, f in enumerate(ml.source))
    low = min(values)
    if low > 0:
        return FaceCase(Case.ORIGIN, (), None, values, tuple(a + b))
    active = tuple(j for j, v in enumerate(values) if v == low)
    return FaceCase(Case.PURE if low < 0 else Case.MIXED, active, low, values, tuple(a + b))


def reconstruct_face(ml: MLSystem, fc: FaceCase) -> frozenset[tuple[int, ...]]:
    """Vertex set of the face predicted by a classification."""
    d = ml.dim
    a = fc.weight[: ml.n]
    pts: list[tuple[int, ...]] = []
    if fc.case in (Case.ORIGIN, Case.MIXED):
        pts.append((0,) * d)
    for j in fc.active:
        f = ml.source[j]
        low = face_value(f.terms, a)
        for alpha in f.terms:
            if sum(x * y for x, y in zip(a, alpha)) == low:
                pts.append(tuple(alpha) + tuple(int(c == j) for c in range(ml.k)))
    return LatticePolytope(tuple(pts)).vertex_set()


def initial_ml_system(ml: MLSystem, w: Sequence[int]) -> list[SparsePolynomial]:
    _split(ml, w)
    return [initial_polynomial(g, w) for g in ml.equations]


def case3_kernel_certificate(ml: MLSystem, w: Sequence[int]) -> KernelCertificate:
    fc = classify_face(ml, w)
    if fc.case != Case.MIXED:
        raise ValueError(f"weight {list(fc.weight)} is in case {int(fc.case)}, not case 3")
    a, _ = _split(ml, w)
    if not any(a):
        raise ValueError("a = 0: handled without a certificate (no torus solutions when a vanishes)")
    n, t = ml.n, fc.t
    columns: list[list[int]] = []
    vals = []
    for block, j in enumerate(fc.active):
        f = ml.source[j]
        init = initial_polynomial(f, a)
        vals.append(face_value(f.terms, a))
        for alpha in init.terms:
            columns.append(list(alpha) + [int(r == block) for r in range(t)])
    matrix = tuple(tuple(col[r] for col in columns) for r in range(n + t))
    vector = tuple(a) + tuple(-v for v in vals)
    cert = KernelCertificate(vector, matrix)
    if not cert.verify():
        raise CertificateError(f"kernel certificate failed for weight {list(fc.weight)}")
    return cert


@dataclass
class ScanResult:
    rows: list[dict]
    counts: dict[int, int]
    unclassified: int
    inconsistent: list[tuple[int, ...]]
    certificates_verified: int
    certificates_routed: int       # case 3 with a = 0, no certificate needed

    def to_dict(self) -> dict:
        return {"counts": {str(k): v for k, v in self.counts.items()},
                "unclassified": self.unclassified,
                "inconsistent": [list(w) for w in self.inconsistent],
                "certificates_verified": self.certificates_verified,
                "certificates_routed": self.certificates_routed,
                "rows": self.rows}


def scan_weight_vectors(ml: MLSystem, radius: int) -> ScanResult:
    """Classify every nonzero w with max-norm at most ``radius``."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    _require_hat(ml)
    P = likelihood_polytope(ml)
    for g in ml.likelihood_equations[1:]:
        if LatticePolytope(tuple(g.terms)) != P:
            raise ValueError("likelihood equations do not share a Newton polytope")
    counts = {int(c): 0 for c in Case}
    rows = []
    inconsistent = []
    unclassified = verified = routed = 0
    for w in product(range(-radius, radius + 1), repeat=ml.dim):
        if not any(w):
            continue
        try:
            fc = classify_face(ml, w)
        except ValueError:
            unclassified += 1
            continue
        counts[int(fc.case)] += 1
        if reconstruct_face(ml, fc) != exposed_face(P, w).face_vertices:
            inconsistent.append(w)
        row = fc.to_dict()
        if fc.case == Case.MIXED:
            if any(w[: ml.n]):
                case3_kernel_certificate(ml, w)
                verified += 1
                row["certificate"] = "verified"
            else:
                routed += 1
                row["certificate"] = "a=0"
        rows.append(row)
    return ScanResult(rows, counts, unclassified, inconsistent, verified, routed)
