"""Convex set templates represented through their support functions.

Each template evaluates a degree-1 positively homogeneous support function
h(y) and its gradient. The gradient of h at y is the boundary point of the
set exposed by direction y, which is what every downstream consumer needs:
invariance checks evaluate <z, C grad h(E'z)>, boundary plots radially scale
directions by 1/h, and planar shadows read off the first two gradient
components at lifted directions (w1, w2, 0).

Templates are immutable value objects; construction validates the data it is
given (symmetry, nonnegativity, continuity across partition facets) and
raises InvalidTemplateError on violations rather than producing silently
meaningless support values later.
"""

from __future__ import annotations

import numpy as np

from .geometry import ConicPartition, find_cone
from .polynomials import HomogeneousPolynomial, evaluate, gradient
from .validation import as_float_vector, as_symmetric


class InvalidTemplateError(ValueError):
    pass


class DegenerateDirectionError(ValueError):
    pass


class EllipsoidTemplate:
    """Set {x : x'Q^{-1}x <= 1} through its support h(y) = sqrt(y'Qy)."""

    def __init__(self, Q):
        Q = as_symmetric(Q, "Q")
        eigs = np.linalg.eigvalsh(Q)
        if eigs.min() < -1e-9:
            raise InvalidTemplateError(f"Q has eigenvalue {eigs.min():.3e} < -1e-9")
        self.Q = Q

    @property
    def dimension(self) -> int:
        return self.Q.shape[0]

    def _form(self, y: np.ndarray) -> float:
        q = float(y @ self.Q @ y)
        nrm2 = float(y @ y)
        if q < -1e-9 * max(nrm2, 1e-300):
            raise InvalidTemplateError(f"quadratic form negative: {q:.3e}")
        return max(q, 0.0)

    def support(self, y) -> float:
        y = as_float_vector(y, "y", self.dimension)
        return float(np.sqrt(self._form(y)))

    def support_gradient(self, y) -> np.ndarray:
        y = as_float_vector(y, "y", self.dimension)
        h = np.sqrt(self._form(y))
        if h <= 1e-12:
            raise DegenerateDirectionError("support vanishes along this direction")
        return self.Q @ y / h

    def polar(self) -> "EllipsoidTemplate":
        return EllipsoidTemplate(np.linalg.inv(self.Q))

    def to_payload(self) -> dict:
        return {"kind": "ellipsoid", "Q": self.Q.tolist()}


class PolysetTemplate:
    """Set with support h(y) = p(y)^(1/2d) for a nonnegative form p of degree 2d.

    Validity is certified either by a stored Gram factor (p(y) = m(y)'G m(y)
    with G positive semidefinite over the degree-d monomial basis, the shape
    synthesis produces) or, absent one, by sampling p on the unit sphere.
    """

    def __init__(self, p: HomogeneousPolynomial, d: int, gram=None, gram_basis=None):
        if d < 1:
            raise InvalidTemplateError("d must be >= 1")
        if p.degree != 2 * d:
            raise InvalidTemplateError(f"p has degree {p.degree}, expected {2 * d}")
        self.p = p
        self.d = d
        self.gram = None
        self.gram_basis = gram_basis
        if gram is not None:
            G = as_symmetric(gram, "gram", tol=1e-8)
            if np.linalg.eigvalsh(G).min() < -1e-9:
                raise InvalidTemplateError("Gram factor is not positive semidefinite")
            if gram_basis is None:
                raise InvalidTemplateError("gram requires its monomial basis")
            if not self._gram_matches(G, gram_basis):
                raise InvalidTemplateError("Gram factor does not reproduce p")
            self.gram = G
        else:
            self._sampled_nonnegativity()
        self._grad = gradient(p)

    def _gram_matches(self, G, basis) -> bool:
        coeffs: dict[tuple, float] = {}
        mons = list(basis)
        for a in range(len(mons)):
            for b in range(len(mons)):
                e = tuple(x + y for x, y in zip(mons[a], mons[b]))
                coeffs[e] = coeffs.get(e, 0.0) + G[a, b]
        scale = max((abs(c) for c in coeffs.values()), default=1.0)
        for e, c in coeffs.items():
            if abs(c - self.p.coefficient(e)) > 1e-7 * max(1.0, scale):
                return False
        for e, c in self.p.items():
            if e not in coeffs and abs(c) > 1e-7:
                return False
        return True

    def _sampled_nonnegativity(self) -> None:
        rng = np.random.default_rng(20240817)
        n = self.p.num_vars
        Y = rng.normal(size=(10000, n))
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        worst = min(evaluate(self.p, y) for y in Y)
        if worst < -1e-9:
            raise InvalidTemplateError(f"p sampled negative: {worst:.3e}")

    @property
    def dimension(self) -> int:
        return self.p.num_vars

    def _value(self, y: np.ndarray) -> float:
        v = evaluate(self.p, y)
        nrm = float(np.linalg.norm(y))
        if v < -1e-9 * max(nrm ** (2 * self.d), 1e-300):
            raise InvalidTemplateError(f"p(y) = {v:.3e} < 0")
        return max(v, 0.0)

    def support(self, y) -> float:
        y = as_float_vector(y, "y", self.dimension)
        return float(self._value(y) ** (1.0 / (2 * self.d)))

    def support_gradient(self, y) -> np.ndarray:
        y = as_float_vector(y, "y", self.dimension)
        v = self._value(y)
        h = v ** (1.0 / (2 * self.d))
        if h <= 1e-12:
            raise DegenerateDirectionError("support vanishes along this direction")
        g = np.array([evaluate(gk, y) for gk in self._grad])
        return g / (2 * self.d * v ** (1.0 - 1.0 / (2 * self.d)))

    def to_payload(self) -> dict:
        return {
            "kind": "polyset",
            "degree": 2 * self.d,
            "coefficients": {",".join(map(str, e)): c for e, c in self.p.items()},
        }


class PiecewiseTemplate:
    """Support sqrt(y'Q_i y) on cone P_i of a conic partition of R^3.

    Continuity across shared facets is a construction invariant; convexity of
    the resulting support function is not implied by the data and must be
    established separately (synthesis enforces a sufficient conic condition
    and verification samples midpoints; see sampled_midpoint_convexity).
    """

    def __init__(self, partition: ConicPartition, Q_list, grid=None):
        if len(Q_list) != len(partition):
            raise InvalidTemplateError(
                f"{len(Q_list)} matrices for {len(partition)} cones")
        self.partition = partition
        self.Q_list = [as_symmetric(Q, f"Q[{i}]") for i, Q in enumerate(Q_list)]
        self.grid = tuple(grid) if grid is not None else None
        for i, j, B in partition.adjacency:
            jump = B.T @ (self.Q_list[i] - self.Q_list[j]) @ B
            if np.abs(jump).max() > 1e-8:
                raise InvalidTemplateError(
                    f"support discontinuous across cones {i},{j}: "
                    f"{np.abs(jump).max():.3e}")
        rng = np.random.default_rng(20240818)
        for i, cone in enumerate(partition.cones):
            R = cone.ray_matrix
            W = rng.random((64, R.shape[1]))
            for w in W:
                y = R @ w
                q = float(y @ self.Q_list[i] @ y)
                if q < -1e-9 * float(y @ y):
                    raise InvalidTemplateError(
                        f"form negative on cone {i}: {q:.3e}")

    @property
    def dimension(self) -> int:
        return self.partition.cones[0].rays[0].size

    def support(self, y) -> float:
        y = as_float_vector(y, "y", self.dimension)
        if np.linalg.norm(y) < 1e-15:
            raise ValueError("piecewise support needs a nonzero direction")
        i = find_cone(self.partition, y)
        q = float(y @ self.Q_list[i] @ y)
        if q < -1e-9 * float(y @ y):
            raise InvalidTemplateError(f"form negative on cone {i}: {q:.3e}")
        return float(np.sqrt(max(q, 0.0)))

    def support_gradient(self, y) -> np.ndarray:
        y = as_float_vector(y, "y", self.dimension)
        if np.linalg.norm(y) < 1e-15:
            raise ValueError("piecewise support needs a nonzero direction")
        i = find_cone(self.partition, y)
        h = np.sqrt(max(float(y @ self.Q_list[i] @ y), 0.0))
        if h <= 1e-12:
            raise DegenerateDirectionError("support vanishes along this direction")
        return self.Q_list[i] @ y / h

    def to_payload(self) -> dict:
        if self.grid is None:
            raise ValueError("only grid-built partitions serialize")
        return {
            "kind": "piecewise",
            "m1": self.grid[0],
            "m2": self.grid[1],
            "Q_list": [Q.tolist() for Q in self.Q_list],
        }


def polar_boundary(template, directions) -> np.ndarray:
    """Radial boundary points y / h(y) of the polar set, one per direction.

    Directions with vanishing support get NaN rows so the remaining points
    are still returned; callers that need hard failures check for NaNs.
    """
    pts = []
    for y in directions:
        y = as_float_vector(y, "direction", template.dimension)
        h = template.support(y)
        pts.append(y / h if h > 1e-12 else np.full(template.dimension, np.nan))
    return np.array(pts)


def projection_boundary(template, planar_directions) -> np.ndarray:
    """Boundary of the planar shadow of a 3-D set.

    The exposed point of S in direction (w1, w2, 0) projects onto the
    boundary point of proj_12(S) exposed by (w1, w2), so the shadow boundary
    is the first two gradient components at lifted directions.
    """
    if template.dimension != 3:
        raise ValueError("projection_boundary expects a 3-D template")
    pts = []
    for w in planar_directions:
        w = as_float_vector(w, "direction", 2)
        g = template.support_gradient(np.array([w[0], w[1], 0.0]))
        pts.append(g[:2])
    return np.array(pts)


def sampled_midpoint_convexity(template, num_pairs: int = 10000,
                               seed: int = 20240819) -> float:
    """Max violation of h((a+b)/2) <= (h(a)+h(b))/2 over random unit pairs.

    Nonpositive (or tiny positive, below 1e-8) return values are consistent
    with a convex support function; genuinely nonconvex piecewise data shows
    up orders of magnitude above that.
    """
    rng = np.random.default_rng(seed)
    n = template.dimension
    worst = -np.inf
    for _ in range(num_pairs):
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        mid = (a + b) / 2.0
        if np.linalg.norm(mid) < 1e-9:
            continue
        excess = template.support(mid) - (template.support(a) + template.support(b)) / 2.0
        worst = max(worst, excess)
    return worst
