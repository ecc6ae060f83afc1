"""Dense homogeneous multivariate polynomials over exponent-tuple keys.

Everything downstream (SOS reformulation, invariance certificates) works with
homogeneous polynomials in at most a handful of variables and degree up to a
few tens, so a dense dict representation with a canonical graded-lex key
order is both simple and deterministic. Coefficients are plain floats; the
whole pipeline is floating-point conic programming, so rational arithmetic
would buy nothing.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

ExponentVector = tuple[int, ...]


def monomial_basis(num_vars: int, degree: int) -> "MonomialBasis":
    """All exponent vectors of the given total degree, graded-lex ordered."""
    if num_vars < 1:
        raise ValueError("num_vars must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    monomials: list[ExponentVector] = []

    def fill(prefix: tuple[int, ...], remaining: int, slots: int) -> None:
        if slots == 1:
            monomials.append(prefix + (remaining,))
            return
        for e in range(remaining, -1, -1):
            fill(prefix + (e,), remaining - e, slots - 1)

    fill((), degree, num_vars)
    return MonomialBasis(num_vars, degree, monomials)


class MonomialBasis:
    """Ordered monomial list of fixed degree, the Gram-matrix index set."""

    def __init__(self, num_vars: int, degree: int, monomials: list[ExponentVector]):
        self.num_vars = num_vars
        self.degree = degree
        self.monomials = monomials
        self.index = {m: k for k, m in enumerate(monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __getitem__(self, k: int) -> ExponentVector:
        return self.monomials[k]


class HomogeneousPolynomial:
    """Homogeneous polynomial as a map from exponent tuples to coefficients.

    Zero coefficients may be absent; iteration over ``items()`` is always in
    graded-lex order so every consumer is deterministic.
    """

    def __init__(self, num_vars: int, degree: int,
                 coefficients: Mapping[ExponentVector, float] | None = None):
        self.num_vars = num_vars
        self.degree = degree
        self.coefficients: dict[ExponentVector, float] = {}
        for e, c in (coefficients or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != num_vars or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e} for {num_vars} variables")
            if sum(e) != degree:
                raise ValueError(f"exponent {e} has degree {sum(e)}, expected {degree}")
            if c != 0.0:
                self.coefficients[e] = self.coefficients.get(e, 0.0) + float(c)

    def items(self) -> list[tuple[ExponentVector, float]]:
        return sorted(self.coefficients.items(), key=lambda ec: ec[0], reverse=True)

    def coefficient(self, e: ExponentVector) -> float:
        return self.coefficients.get(tuple(e), 0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coefficients.values())

    def scale(self, s: float) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial(
            self.num_vars, self.degree,
            {e: s * c for e, c in self.coefficients.items()})

    def add(self, other: "HomogeneousPolynomial") -> "HomogeneousPolynomial":
        if (other.num_vars, other.degree) != (self.num_vars, self.degree):
            raise ValueError("polynomial shape mismatch")
        out = dict(self.coefficients)
        for e, c in other.coefficients.items():
            out[e] = out.get(e, 0.0) + c
        return HomogeneousPolynomial(self.num_vars, self.degree, out)

    def mul(self, other: "HomogeneousPolynomial") -> "HomogeneousPolynomial":
        if other.num_vars != self.num_vars:
            raise ValueError("polynomial variable-count mismatch")
        out: dict[ExponentVector, float] = {}
        for e1, c1 in self.coefficients.items():
            for e2, c2 in other.coefficients.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return HomogeneousPolynomial(self.num_vars, self.degree + other.degree, out)

    def __repr__(self) -> str:
        terms = ", ".join(f"{e}: {c:g}" for e, c in self.items())
        return f"HomogeneousPolynomial({self.num_vars} vars, deg {self.degree}, {{{terms}}})"


def evaluate(p: HomogeneousPolynomial, point: Sequence[float]) -> float:
    """Evaluate p at the point by direct monomial expansion."""
    if len(point) != p.num_vars:
        raise ValueError(f"point has {len(point)} coordinates, expected {p.num_vars}")
    total = 0.0
    for e, c in p.coefficients.items():
        term = c
        for x, k in zip(point, e):
            if k:
                term *= float(x) ** k
        total += term
    return total


def gradient(p: HomogeneousPolynomial) -> list[HomogeneousPolynomial]:
    """Partial derivatives, one degree lower each."""
    if p.degree == 0:
        return [HomogeneousPolynomial(p.num_vars, 0, {}) for _ in range(p.num_vars)]
    out = []
    for i in range(p.num_vars):
        coeffs: dict[ExponentVector, float] = {}
        for e, c in p.coefficients.items():
            if e[i] == 0:
                continue
            de = list(e)
            de[i] -= 1
            coeffs[tuple(de)] = c * e[i]
        out.append(HomogeneousPolynomial(p.num_vars, p.degree - 1, coeffs))
    return out


def power_of_linear_form(c: Sequence[float], degree: int) -> HomogeneousPolynomial:
    """(c' y)^degree expanded by the multinomial theorem."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    n = len(c)
    coeffs: dict[ExponentVector, float] = {}
    for e in monomial_basis(n, degree):
        coef = float(math.factorial(degree))
        for ci, ei in zip(c, e):
            if ci == 0.0 and ei > 0:
                coef = 0.0
                break
            coef *= ci ** ei / math.factorial(ei)
        if coef != 0.0:
            coeffs[e] = coef
    return HomogeneousPolynomial(n, degree, coeffs)


def pullback(p: HomogeneousPolynomial, M: Iterable[Sequence[float]]) -> HomogeneousPolynomial:
    """Compose with a linear map: returns q(z) = p(Mz), same degree.

    Expanded symbolically (each row's linear form raised to its exponent via
    the multinomial theorem, then convolved), so SOS coefficient-matching
    rows downstream are exact to machine precision.
    """
    rows = [list(r) for r in M]
    if len(rows) != p.num_vars:
        raise ValueError(f"matrix has {len(rows)} rows, expected {p.num_vars}")
    nz = len(rows[0]) if rows else 0
    if any(len(r) != nz for r in rows):
        raise ValueError("ragged matrix")
    out = HomogeneousPolynomial(nz, p.degree, {})
    for e, c in p.coefficients.items():
        term = HomogeneousPolynomial(nz, 0, {(0,) * nz: c})
        for i, k in enumerate(e):
            if k:
                term = term.mul(power_of_linear_form(rows[i], k))
        out = out.add(term)
    return out
