"""Polyhedral homotopy continuation.

A square system F on supports A_1..A_d is solved in two stages.

1. A random-coefficient system G on the same supports is solved by the
   polyhedral homotopy of a random lifting: each fine mixed cell gives a
   binomial start system whose |det| solutions are continued in
   s = -log t from s0 down to 0.
2. The solutions of G are carried to F by the linear homotopy
   (1 - tau) * gamma * G + tau * F with a random unit complex gamma.

Stage 2 keeps the polyhedral paths away from real discriminants of
real-coefficient targets (ML systems usually have real data).
"""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import exact
from .core import DataVector, PolynomialSystem, sample_generic_system, unit_circle
from .mixed_volume import (
    MixedCell,
    MixedSubdivision,
    MixedVolumeDisagreement,
    mixed_cells,
    mixed_volume_cross_check,
    mixed_volume_ie,
)
from .ml_system import build_ml_system
from .polytope import LatticePolytope

logger = logging.getLogger(__name__)

# Start of stage 1 in s = -log t, after normalising the smallest positive
# lifted weight to 1: exp(-S0) is far below any tolerance in use.
S0 = 40.0
MAX_STEP = 0.1
# Mid-path bounds; torus membership is only judged at the endpoint.
DIVERGENCE_BOUND = 1e12
VANISHING_BOUND = 1e-20
# Paths that stall at min_step are tracked once more with this much smaller floor.
RESCUE_FACTOR = 1e-5


@dataclass(frozen=True)
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-7
    newton_tolerance: float = 1e-10
    max_newton_iters: int = 10
    max_steps: int = 20000
    torus_threshold: float = 1e-8
    dedup_distance: float = 1e-6

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step <= MAX_STEP:
            raise ValueError("need 0 < min_step < initial_step <= 0.1")
        for name in ("newton_tolerance", "torus_threshold", "dedup_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_newton_iters < 1 or self.max_steps < 1:
            raise ValueError("iteration limits must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# --- evaluation ----------------------------------------------------------


class _Stacked:
    """All terms of a square system stacked into one array for vectorised evaluation."""

    def __init__(self, exps: list[np.ndarray]):
        self.d = len(exps)
        self.sizes = [len(e) for e in exps]
        self.E = np.vstack(exps).astype(float)
        self.Ei = np.vstack(exps)
        owner = np.repeat(np.arange(self.d), self.sizes)
        self.S = np.zeros((self.d, len(owner)))
        self.S[owner, np.arange(len(owner))] = 1.0

    def monomials(self, y: np.ndarray) -> np.ndarray:
        return np.prod(y[None, :] ** self.Ei, axis=1)

    def value_jac(self, y: np.ndarray, coef: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        terms = coef * self.monomials(y)
        H = self.S @ terms
        J = (self.S @ (terms[:, None] * self.E)) / y[None, :]
        return H, J

    def value(self, y: np.ndarray, coef: np.ndarray) -> np.ndarray:
        return self.S @ (coef * self.monomials(y))

    def backward_error(self, y: np.ndarray, coef: np.ndarray) -> float:
        terms = coef * self.monomials(y)
        scale = self.S @ np.abs(terms)
        return float(np.max(np.abs(self.S @ terms) / np.maximum(scale, 1e-300)))


def residual(system: PolynomialSystem, point: Sequence[complex]) -> float:
    """Relative backward error max_i |f_i(x)| / sum_a |c_a x^a|."""
    arrays = [f.arrays() for f in system]
    ev = _Stacked([e for e, _ in arrays])
    return ev.backward_error(np.asarray(point, dtype=complex), np.concatenate([c for _, c in arrays]))


# --- binomial start systems ------------------------------------------------


@dataclass(frozen=True)
class StartSystem:
    cell: MixedCell
    exponents: tuple[tuple[int, ...], ...]   # rows b_i - a_i
    rhs: tuple[complex, ...]                 # y^(b_i - a_i) = rhs_i
    solutions: tuple[np.ndarray, ...]

    def residuals(self) -> list[float]:
        out = []
        for y in self.solutions:
            worst = 0.0
            for v, r in zip(self.exponents, self.rhs):
                lhs = np.prod(y ** np.array(v))
                worst = max(worst, abs(lhs - r) / abs(r))
            out.append(worst)
        return out


def solve_binomial(V: Sequence[Sequence[int]], rhs: Sequence[complex]) -> list[np.ndarray]:
    """All torus solutions of y^(V_i) = rhs_i via the Hermite form of V."""
    d = len(V)
    if exact.det(V) == 0:
        raise ValueError("singular exponent matrix")
    H, U = exact.hermite(V)
    logr = [complex(math.log(abs(r)), cmath.phase(r)) for r in rhs]
    # y^(H_i) = prod_k rhs_k^(U_ik), kept in log form.
    target = [sum(U[i][k] * logr[k] for k in range(d)) for i in range(d)]
    partial = [[0j] * d]
    for i in range(d - 1, -1, -1):
        nxt = []
        for logy in partial:
            rest = target[i] - sum(H[i][j] * logy[j] for j in range(i + 1, d))
            for m in range(H[i][i]):
                cand = list(logy)
                cand[i] = (rest + 2j * math.pi * m) / H[i][i]
                nxt.append(cand)
        partial = nxt
    return [np.exp(np.array(p, dtype=complex)) for p in partial]


def binomial_start_solutions(cell: MixedCell, supports, coeffs: Sequence[np.ndarray]) -> StartSystem:
    """Start solutions of the binomial system picked out by a mixed cell.

    Equation i keeps the two terms of its edge: c_a y^a + c_b y^b = 0.
    """
    V, rhs = [], []
    for i, (a, b) in enumerate(cell.edges):
        pa, pb = supports[i][a], supports[i][b]
        V.append(tuple(int(x) - int(y) for x, y in zip(pb, pa)))
        rhs.append(complex(-coeffs[i][a] / coeffs[i][b]))
    sols = solve_binomial(V, rhs)
    if len(sols) != cell.det:
        raise RuntimeError(f"binomial system gave {len(sols)} solutions for a cell of determinant {cell.det}")
    return StartSystem(cell, tuple(V), tuple(rhs), tuple(sols))


# --- path tracking ----------------------------------------------------------


@dataclass
class PathResult:
    status: str                      # converged | diverged | step-limit
    point: Optional[np.ndarray]
    residual: float
    steps: int
    parameter: float = 0.0           # where tracking stopped


def _newton(ev: _Stacked, y: np.ndarray, coef: np.ndarray, tol: float, iters: int,
            strict: bool) -> Optional[np.ndarray]:
    """Newton at fixed parameter. With ``strict`` each update must shrink by half."""
    prev = math.inf
    for _ in range(iters):
        H, J = ev.value_jac(y, coef)
        try:
            dy = np.linalg.solve(J, -H)
        except np.linalg.LinAlgError:
            return None
        size = np.linalg.norm(dy) / (1.0 + np.linalg.norm(y))
        if not np.isfinite(size) or (strict and size > 0.5 * prev) or size > 0.5:
            return None
        y = y + dy
        if np.any(y == 0):
            return None
        if size < tol:
            return y
        prev = size
    return None


def track_path(start: np.ndarray, ev: _Stacked, coef: Callable[[float], np.ndarray],
               dcoef: Callable[[float], np.ndarray], p0: float, p1: float,
               config: TrackerConfig) -> PathResult:
    """Euler predictor, Newton corrector, from parameter p0 to p1 (|p1 - p0| <= 1)."""
    y = np.asarray(start, dtype=complex).copy()
    p = p0
    direction = 1.0 if p1 > p0 else -1.0
    step = config.initial_step
    good = 0
    # Tracking only needs to stay on the path; the endpoint is polished to newton_tolerance.
    corrector_tol = max(1e3 * config.newton_tolerance, 1e-7)
    steps = 0
    while direction * (p1 - p) > 1e-15:
        if steps >= config.max_steps:
            return PathResult("step-limit", y, math.inf, steps, p)
        steps += 1
        h = min(step, abs(p1 - p))
        c = coef(p)
        mon = ev.monomials(y)
        _, J = ev.value_jac(y, c)
        dH = ev.S @ (dcoef(p) * mon)
        try:
            tangent = np.linalg.solve(J, -dH)
        except np.linalg.LinAlgError:
            tangent = None
        accepted = None
        if tangent is not None and np.all(np.isfinite(tangent)):
            q = p + direction * h
            if abs(q - p1) < 1e-15:
                q = p1
            guess = y + direction * h * tangent
            if not np.any(guess == 0):
                accepted = _newton(ev, guess, coef(q), corrector_tol, 3, True)
        if accepted is None:
            step = h / 2
            good = 0
            if step < config.min_step:
                return PathResult("step-limit", y, math.inf, steps, p)
            continue
        y, p = accepted, q
        if np.max(np.abs(y)) > DIVERGENCE_BOUND or np.min(np.abs(y)) < VANISHING_BOUND:
            return PathResult("diverged", y, math.inf, steps, p)
        good += 1
        if good >= 3:
            step = min(2 * step, MAX_STEP)
            good = 0
    return PathResult("converged", y, ev.backward_error(y, coef(p1)), steps, p1)


# --- solving -----------------------------------------------------------------


@dataclass
class Solution:
    point: np.ndarray
    residual: float

    def to_dict(self) -> dict:
        return {"point": [[float(z.real), float(z.imag)] for z in self.point], "residual": self.residual}


@dataclass
class SolveReport:
    paths_tracked: int
    paths_converged: int
    paths_diverged: int
    paths_merged: int
    solutions: list[Solution]
    mixed_volume: int
    config: TrackerConfig
    seed: int
    paths_failed: int = 0               # step limit or residual above threshold
    paths_off_torus: int = 0
    retries: list["SolveReport"] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def agreement(self) -> bool:
        return self.count == self.mixed_volume

    def to_dict(self) -> dict:
        return {"count": self.count, "mixed_volume": self.mixed_volume, "agreement": self.agreement,
                "paths": {"tracked": self.paths_tracked, "converged": self.paths_converged,
                          "diverged": self.paths_diverged, "merged": self.paths_merged,
                          "failed": self.paths_failed, "off_torus": self.paths_off_torus},
                "solutions": [s.to_dict() for s in self.solutions],
                "config": self.config.to_dict(), "seed": self.seed,
                "retries": [r.to_dict() for r in self.retries]}


def verify_torus_membership(report: SolveReport, threshold: Optional[float] = None) -> bool:
    if threshold is None:
        threshold = report.config.torus_threshold
    return all(bool(np.all(np.abs(s.point) > threshold)) for s in report.solutions)


def _cell_exponents(cell: MixedCell, sub: MixedSubdivision) -> list[np.ndarray]:
    """Lifted weights e_a = <w, a> + omega_a - beta_i, scaled so the least positive one is 1."""
    raw = []
    for i, (a, _) in enumerate(cell.edges):
        beta = sub.lifted_value(i, a, cell.normal)
        raw.append([sub.lifted_value(i, r, cell.normal) - beta for r in range(len(sub.supports[i]))])
    positive = [e for row in raw for e in row if e > 0]
    if any(e < 0 for row in raw for e in row):
        raise RuntimeError("mixed cell normal does not certify a lower face")
    unit = min(positive) if positive else Fraction(1)
    return [np.array([float(e / unit) for e in row]) for row in raw]


def _dedup(points: list[tuple[np.ndarray, float]], dist: float) -> tuple[list[Solution], int]:
    kept: list[Solution] = []
    merged = 0
    for y, res in points:
        scale = max(1.0, float(np.linalg.norm(y)))
        if any(np.linalg.norm(y - s.point) / scale < dist for s in kept):
            merged += 1
            continue
        kept.append(Solution(y, res))
    return kept, merged


def _track_rescued(start, ev, coef, dcoef, p0, p1, config: TrackerConfig) -> PathResult:
    result = track_path(start, ev, coef, dcoef, p0, p1, config)
    if result.status != "step-limit":
        return result
    fine = replace(config, min_step=config.min_step * RESCUE_FACTOR)
    again = track_path(start, ev, coef, dcoef, p0, p1, fine)
    again.steps += result.steps
    return again


def _track_all(system: PolynomialSystem, seed: int, config: TrackerConfig,
               workers: int) -> tuple[list[PathResult], MixedSubdivision]:
    d = system.n
    arrays = [f.arrays() for f in system]
    supports = [[tuple(int(x) for x in row) for row in e] for e, _ in arrays]
    ev = _Stacked([e for e, _ in arrays])
    target = np.concatenate([c for _, c in arrays])
    rng = np.random.default_rng([seed, 0x50BE])
    gen = [unit_circle(rng, len(e)) for e, _ in arrays]
    cG = np.concatenate(gen)
    gamma = complex(unit_circle(rng, 1)[0])
    sub = mixed_cells(supports, seed)

    jobs = []
    for cell in sub.cells:
        start = binomial_start_solutions(cell, supports, gen)
        e = np.concatenate(_cell_exponents(cell, sub))
        for y in start.solutions:
            jobs.append((y, e))

    # stage 1 in sigma = s / S0, from 1 to 0; stage 2 in tau from 0 to 1
    def run(job) -> PathResult:
        y0, e = job
        ce = cG.copy()

        def c1(sig):
            return ce * np.exp(-S0 * sig * e)

        def dc1(sig):
            return -S0 * e * c1(sig)

        y = _newton(ev, y0, c1(1.0), config.newton_tolerance, config.max_newton_iters, False)
        if y is None:
            y = y0
        first = _track_rescued(y, ev, c1, dc1, 1.0, 0.0, config)
        if first.status != "converged":
            return first

        def c2(tau):
            return (1 - tau) * gamma * cG + tau * target

        def dc2(tau):
            return target - gamma * cG

        second = _track_rescued(first.point, ev, c2, dc2, 0.0, 1.0, config)
        second.steps += first.steps
        if second.status != "converged":
            return second
        y = _newton(ev, second.point, target, config.newton_tolerance, config.max_newton_iters, False)
        if y is None:
            y = second.point
        return PathResult("converged", y, ev.backward_error(y, target), second.steps)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    if len(results) != sub.total or d != len(supports):
        raise RuntimeError("path count differs from the sum of cell determinants")
    return results, sub


def solve_system(system: PolynomialSystem, seed: int = 0, config: Optional[TrackerConfig] = None,
                 mixed_volume: Optional[int] = None, workers: int = 1) -> SolveReport:
    """Torus solutions of a square system by polyhedral homotopy (no retry)."""
    config = config or TrackerConfig()
    if len(system) != system.n:
        raise ValueError(f"system is not square: {len(system)} equations in {system.n} variables")
    if mixed_volume is None:
        mixed_volume = mixed_volume_ie([LatticePolytope(tuple(f.terms)) for f in system])
    results, sub = _track_all(system, seed, config, workers)
    if sub.total != mixed_volume:
        raise MixedVolumeDisagreement(
            f"mixed cells give {sub.total} paths but inclusion-exclusion gives {mixed_volume}")
    good: list[tuple[np.ndarray, float]] = []
    diverged = failed = off_torus = 0
    for r in results:
        if r.status == "diverged":
            diverged += 1
        elif r.status != "converged" or not r.residual < 100 * config.newton_tolerance:
            failed += 1
        elif np.min(np.abs(r.point)) <= config.torus_threshold:
            off_torus += 1
        else:
            good.append((r.point, r.residual))
    sols, merged = _dedup(good, config.dedup_distance)
    return SolveReport(len(results), len(good), diverged, merged, sols, mixed_volume, config, seed,
                       failed, off_torus)


def retry_seed(seed: int) -> int:
    return int(np.random.default_rng([seed, 0x4E7]).integers(0, 2**63))


def solve_with_retry(system: PolynomialSystem, seed: int = 0, config: Optional[TrackerConfig] = None,
                     mixed_volume: Optional[int] = None, workers: int = 1) -> SolveReport:
    """Solve; on disagreement re-randomise once with a derived seed, keeping both reports."""
    first = solve_system(system, seed, config, mixed_volume, workers)
    if first.agreement:
        return first
    logger.warning("count %d != mixed volume %d (seed %d); retrying", first.count, first.mixed_volume, seed)
    second = solve_system(system, retry_seed(seed), config, first.mixed_volume, workers)
    second.retries = [first]
    return second


def solve_ml_system(F: PolynomialSystem, u: DataVector, seed: int = 0,
                    config: Optional[TrackerConfig] = None, workers: int = 1,
                    retry: bool = True) -> SolveReport:
    """Solve the Lagrange likelihood system of F for data u."""
    config = config or TrackerConfig()
    ml = build_ml_system(F, u)
    if F.k > F.n:
        logger.warning("k=%d > n=%d: the model is generically empty", F.k, F.n)
        return SolveReport(0, 0, 0, 0, [], 0, config, seed)
    system = ml.as_system()
    mv = mixed_volume_ie(ml.newton_polytopes())
    solve = solve_with_retry if retry else solve_system
    return solve(system, seed, config, mv, workers)


@dataclass
class BKKTrial:
    """One random square system: mixed volume from both engines against the solve count."""

    supports: list[list[tuple[int, ...]]]
    seed: int
    mixed_volume: int
    reports: list[SolveReport]

    @property
    def passed_first(self) -> bool:
        return self.reports[0].agreement

    @property
    def passed(self) -> bool:
        return self.reports[-1].agreement

    def to_dict(self) -> dict:
        return {"supports": [[list(a) for a in s] for s in self.supports], "seed": self.seed,
                "mixed_volume": self.mixed_volume, "passed_first": self.passed_first,
                "passed": self.passed, "counts": [r.count for r in self.reports],
                "seeds": [r.seed for r in self.reports]}


def bkk_trial(supports, seed: int, config: Optional[TrackerConfig] = None, retry: bool = True) -> BKKTrial:
    """Generic coefficients on ``supports``; a failure is retried once with fresh coefficients."""
    supports = [[tuple(int(x) for x in a) for a in s] for s in supports]
    mv = mixed_volume_cross_check(None, supports, seed)
    reports = [solve_system(sample_generic_system(supports, seed), seed, config, mv)]
    if retry and not reports[0].agreement:
        again = retry_seed(seed)
        reports.append(solve_system(sample_generic_system(supports, again), again, config, mv))
    return BKKTrial(supports, seed, mv, reports)
