"""Sparse polynomials, polynomial systems and data vectors.

Exponents are tuples of non-negative ints. Coefficients carry a double
precision complex value and, when they came from user input, the exact
rational real and imaginary parts it was rounded from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

Exponent = tuple[int, ...]

_INT64_MAX = 2**63 - 1


class SystemFormatError(ValueError):
    """Malformed or invalid system document."""

    def __init__(self, message: str, polynomial: Optional[int] = None):
        self.polynomial = polynomial
        if polynomial is not None:
            message = f"polynomials[{polynomial}]: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Coefficient:
    value: complex
    exact: Optional[tuple[Fraction, Fraction]] = None

    @classmethod
    def from_exact(cls, re: Fraction | int, im: Fraction | int = 0) -> "Coefficient":
        re, im = Fraction(re), Fraction(im)
        return cls(complex(float(re), float(im)), (re, im))

    def scale(self, k: int | Fraction) -> "Coefficient":
        if self.exact is None:
            return Coefficient(self.value * float(k))
        return Coefficient.from_exact(self.exact[0] * k, self.exact[1] * k)

    def __neg__(self) -> "Coefficient":
        return self.scale(-1)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        if self.exact is not None and other.exact is not None:
            a, b = self.exact
            c, d = other.exact
            return Coefficient.from_exact(a * c - b * d, a * d + b * c)
        return Coefficient(self.value * other.value)

    def is_zero(self) -> bool:
        if self.exact is not None:
            return self.exact == (0, 0)
        return self.value == 0

    def rational_parts(self) -> tuple[Fraction, Fraction]:
        if self.exact is not None:
            return self.exact
        return Fraction(self.value.real), Fraction(self.value.imag)


def _check_exponent(alpha: Sequence[int], dim: int) -> Exponent:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim:
        raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {dim}")
    for a in alpha:
        if a < 0:
            raise ValueError(f"negative exponent {alpha}")
        if a > _INT64_MAX:
            raise OverflowError(f"exponent {alpha} exceeds 64-bit range")
    return alpha


@dataclass(frozen=True)
class SparsePolynomial:
    """Map from exponent vectors to non-zero coefficients in ``dim`` variables."""

    dim: int
    terms: Mapping[Exponent, Coefficient] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for alpha, c in self.terms.items():
            if not isinstance(c, Coefficient):
                c = Coefficient(complex(c))
            if c.is_zero():
                continue
            clean[_check_exponent(alpha, self.dim)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def from_dict(cls, dim: int, terms: Mapping[Sequence[int], object]) -> "SparsePolynomial":
        out = {}
        for alpha, c in terms.items():
            if isinstance(c, Coefficient):
                out[tuple(alpha)] = c
            elif isinstance(c, (int, Fraction)):
                out[tuple(alpha)] = Coefficient.from_exact(c)
            else:
                out[tuple(alpha)] = Coefficient(complex(c))
        return cls(dim, out)

    @property
    def support(self) -> list[Exponent]:
        return list(self.terms)

    @property
    def is_exact(self) -> bool:
        return all(c.exact is not None for c in self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, alpha: Sequence[int]) -> complex:
        c = self.terms.get(tuple(alpha))
        return 0j if c is None else c.value

    def shift(self, beta: Sequence[int]) -> "SparsePolynomial":
        """Multiply by the monomial x^beta."""
        return SparsePolynomial(self.dim, {tuple(a + b for a, b in zip(alpha, beta)): c
                                           for alpha, c in self.terms.items()})

    def embed(self, dim: int) -> "SparsePolynomial":
        """View in ``dim >= self.dim`` variables, padding exponents with zeros."""
        pad = (0,) * (dim - self.dim)
        return SparsePolynomial(dim, {alpha + pad: c for alpha, c in self.terms.items()})

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix (terms x dim) and complex coefficient vector."""
        exps = np.array(list(self.terms), dtype=np.int64).reshape(len(self.terms), self.dim)
        coeffs = np.array([c.value for c in self.terms.values()], dtype=complex)
        return exps, coeffs

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.terms.items():
            mono = "*".join(f"x{i + 1}^{a}" if a > 1 else f"x{i + 1}" for i, a in enumerate(alpha) if a)
            coef = _format_coefficient(c)
            parts.append(f"{coef}*{mono}" if mono else coef)
        return " + ".join(parts)


def _format_coefficient(c: Coefficient) -> str:
    if c.exact is not None:
        re, im = c.exact
        if im == 0:
            return str(re)
        return f"({re}+{im}i)"
    return f"({c.value.real:.6g}{c.value.imag:+.6g}i)"


@dataclass(frozen=True)
class PolynomialSystem:
    polynomials: tuple[SparsePolynomial, ...]
    n: int

    def __post_init__(self):
        polys = tuple(self.polynomials)
        object.__setattr__(self, "polynomials", polys)
        if len(polys) < 1:
            raise SystemFormatError("a system needs at least one polynomial")
        for j, f in enumerate(polys):
            if f.dim != self.n:
                raise SystemFormatError(f"dimension {f.dim} does not match n={self.n}", j)
            if f.is_zero():
                raise SystemFormatError("empty support", j)

    @property
    def k(self) -> int:
        return len(self.polynomials)

    def __len__(self) -> int:
        return len(self.polynomials)

    def __iter__(self):
        return iter(self.polynomials)

    def __getitem__(self, j: int) -> SparsePolynomial:
        return self.polynomials[j]

    @property
    def supports(self) -> list[list[Exponent]]:
        return [f.support for f in self.polynomials]


@dataclass(frozen=True)
class DataVector:
    values: tuple[float, ...]
    exact: Optional[tuple[Fraction, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.exact is not None:
            object.__setattr__(self, "exact", tuple(Fraction(v) for v in self.exact))
        for v in self.values:
            if not v > 0:
                raise ValueError(f"data vector entries must be positive, got {v}")

    @classmethod
    def from_exact(cls, values: Iterable[Fraction | int | str]) -> "DataVector":
        ex = tuple(Fraction(v) for v in values)
        return cls(tuple(float(v) for v in ex), ex)

    def __len__(self) -> int:
        return len(self.values)

    def coefficient(self, i: int) -> Coefficient:
        if self.exact is not None:
            return Coefficient.from_exact(self.exact[i])
        return Coefficient(complex(self.values[i]))

    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def sample_data_vector(n: int, seed: int) -> DataVector:
    """Generic data: uniform on (0.5, 1.5)^n."""
    rng = np.random.default_rng([seed, 0xDA7A])
    return DataVector(tuple(rng.uniform(0.5, 1.5, size=n)))


def unit_circle(rng: np.random.Generator, size: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(size))


def sample_generic_system(supports: Sequence[Sequence[Sequence[int]]], seed: int) -> PolynomialSystem:
    """Polynomials on the given supports with coefficients uniform on the unit circle."""
    if not supports:
        raise ValueError("empty support list")
    n = len(supports[0][0])
    rng = np.random.default_rng(seed)
    polys = []
    for j, supp in enumerate(supports):
        exps = [tuple(a) for a in supp]
        if len(set(exps)) != len(exps):
            raise SystemFormatError("duplicate exponent in support", j)
        coeffs = unit_circle(rng, len(exps))
        polys.append(SparsePolynomial(n, {a: Coefficient(complex(c)) for a, c in zip(exps, coeffs)}))
    return PolynomialSystem(tuple(polys), n)


def partial_derivative(f: SparsePolynomial, i: int) -> SparsePolynomial:
    """Derivative with respect to variable ``i`` (1-based)."""
    if not 1 <= i <= f.dim:
        raise IndexError(f"variable index {i} out of range 1..{f.dim}")
    k = i - 1
    out = {}
    for alpha, c in f.terms.items():
        if alpha[k] == 0:
            continue
        beta = list(alpha)
        beta[k] -= 1
        out[tuple(beta)] = c.scale(alpha[k])
    return SparsePolynomial(f.dim, out)


def _power(z: complex, e: int) -> complex:
    result = 1 + 0j
    while e:
        if e & 1:
            result *= z
        z *= z
        e >>= 1
    return result


def evaluate(f: SparsePolynomial, point: Sequence[complex]) -> complex:
    if len(point) != f.dim:
        raise ValueError(f"point has length {len(point)}, expected {f.dim}")
    total = 0j
    for alpha, c in f.terms.items():
        term = c.value
        for z, a in zip(point, alpha):
            if a:
                term *= _power(complex(z), a)
        total += term
    return total


def multiply_by_full_monomial(F: PolynomialSystem) -> PolynomialSystem:
    """The hat transform: multiply every polynomial by x1*...*xn."""
    ones = (1,) * F.n
    return PolynomialSystem(tuple(f.shift(ones) for f in F), F.n)


def is_hat_form(F: PolynomialSystem) -> bool:
    return all(min(alpha) >= 1 for f in F for alpha in f.terms)


# --- JSON document --------------------------------------------------------


def _parse_rational(text, where: str, j: int) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise SystemFormatError(f"{where} must be a rational string, got {text!r}", j)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SystemFormatError(f"bad rational {text!r} in {where}", j) from exc


def _format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_decimal(q: Fraction) -> str:
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return _format_rational(q)
    places = max(twos, fives)
    scaled = q * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass(frozen=True)
class SystemDocument:
    """A parsed system file: the system plus the optional data vector and seed."""

    system: PolynomialSystem
    u: Optional[DataVector] = None
    seed: Optional[int] = None


def parse_document(text: str | bytes) -> SystemDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SystemFormatError("document must be a JSON object")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SystemFormatError(f"'n' must be a positive integer, got {n!r}")
    polys_doc = doc.get("polynomials")
    if not isinstance(polys_doc, list) or not polys_doc:
        raise SystemFormatError("'polynomials' must be a non-empty list")

    polys = []
    for j, pdoc in enumerate(polys_doc):
        terms_doc = pdoc.get("terms") if isinstance(pdoc, dict) else None
        if not isinstance(terms_doc, list):
            raise SystemFormatError("missing 'terms' list", j)
        terms: dict[Exponent, Coefficient] = {}
        for tdoc in terms_doc:
            if not isinstance(tdoc, dict) or not isinstance(tdoc.get("exponent"), list):
                raise SystemFormatError("term needs an 'exponent' list", j)
            alpha = tdoc["exponent"]
            if not all(isinstance(a, int) and not isinstance(a, bool) for a in alpha):
                raise SystemFormatError(f"non-integer exponent {alpha}", j)
            if len(alpha) != n:
                raise SystemFormatError(f"dimension mismatch: exponent {alpha} has length {len(alpha)}, n={n}", j)
            if any(a < 0 for a in alpha):
                raise SystemFormatError(f"negative exponent {alpha}", j)
            if any(a > _INT64_MAX for a in alpha):
                raise SystemFormatError(f"exponent {alpha} exceeds 64-bit range", j)
            key = tuple(alpha)
            if key in terms:
                raise SystemFormatError(f"duplicate exponent {alpha}", j)
            re = _parse_rational(tdoc.get("re", "0"), "re", j)
            im = _parse_rational(tdoc.get("im", "0"), "im", j)
            terms[key] = Coefficient.from_exact(re, im)
        poly = SparsePolynomial(n, terms)
        if poly.is_zero():
            raise SystemFormatError("empty support", j)
        polys.append(poly)
    system = PolynomialSystem(tuple(polys), n)

    u = None
    if doc.get("u") is not None:
        raw = doc["u"]
        if not isinstance(raw, list) or len(raw) != n:
            raise SystemFormatError(f"'u' must be a list of {n} decimal strings")
        try:
            u = DataVector.from_exact(Fraction(str(v)) for v in raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise SystemFormatError(f"bad data vector: {exc}") from exc
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64):
        raise SystemFormatError(f"'seed' must be an unsigned 64-bit integer, got {seed!r}")
    return SystemDocument(system, u, seed)


def parse_system(text: str | bytes) -> PolynomialSystem:
    return parse_document(text).system


def system_to_dict(F: PolynomialSystem, u: Optional[DataVector] = None, seed: Optional[int] = None) -> dict:
    doc: dict = {"n": F.n, "polynomials": []}
    for f in F:
        terms = []
        for alpha in sorted(f.terms):
            re, im = f.terms[alpha].rational_parts()
            terms.append({"exponent": list(alpha), "re": _format_rational(re), "im": _format_rational(im)})
        doc["polynomials"].append({"terms": terms})
    if u is not None:
        if u.exact is not None:
            doc["u"] = [_format_decimal(v) for v in u.exact]
        else:
            doc["u"] = [repr(v) for v in u.values]
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def serialize_system(F: PolynomialSystem, u: Optional[DataVector] = None, seed: Optional[int] = None) -> str:
    return json.dumps(system_to_dict(F, u, seed), indent=2)
