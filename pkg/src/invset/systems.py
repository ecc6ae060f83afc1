"""System models, the control-to-algebraic reduction, invariance verification.

A linear control system x' = Ax + Bu is controlled invariant on a set exactly
when the algebraic system E x' = C x is invariant on it, where E projects
onto the complement of the input image and C = E A. Verification here is the
a-posteriori sampled kind: evaluate the boundary normal-velocity inner
product along deterministically sampled directions and report the worst
normalized violation. It complements, never replaces, the conic certificates
produced at synthesis time.
"""

from __future__ import annotations

import numpy as np

from .geometry import complement_projection
from .validation import as_float_matrix

_GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


class ControlSystem:
    def __init__(self, A, B):
        self.A = as_float_matrix(A, "A")
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"A must be square, got {self.A.shape}")
        B = np.asarray(B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        self.B = as_float_matrix(B, "B", rows=self.A.shape[0])

    @property
    def dimension(self) -> int:
        return self.A.shape[0]


class AlgebraicSystem:
    def __init__(self, E, C):
        self.E = as_float_matrix(E, "E")
        self.C = as_float_matrix(C, "C", rows=self.E.shape[0], cols=self.E.shape[1])
        if self.E.shape[0] > self.E.shape[1]:
            raise ValueError("E must have at most as many rows as columns")

    @property
    def reduced_dimension(self) -> int:
        return self.E.shape[0]

    @property
    def dimension(self) -> int:
        return self.E.shape[1]


def reduce(cs: ControlSystem) -> AlgebraicSystem:
    """Project the dynamics onto the complement of the input image."""
    E = complement_projection(cs.B)
    return AlgebraicSystem(E, E @ cs.A)


def unit_directions(r: int, num_samples: int) -> np.ndarray:
    """Deterministic low-discrepancy unit vectors in R^r.

    r = 1 alternates signs, r = 2 walks uniform angles, r = 3 uses the
    Fibonacci sphere spiral; higher dimensions fall back to a fixed-seed
    Gaussian draw. Identical arguments always give identical samples.
    """
    if r < 1:
        return np.zeros((0, 0))
    if num_samples < 1:
        return np.zeros((0, r))
    if r == 1:
        return np.array([[1.0 if k % 2 == 0 else -1.0] for k in range(num_samples)])
    if r == 2:
        theta = 2.0 * np.pi * np.arange(num_samples) / num_samples
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if r == 3:
        k = np.arange(num_samples)
        z = 1.0 - (2.0 * k + 1.0) / num_samples
        rad = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        theta = 2.0 * np.pi * k / _GOLDEN
        return np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])
    rng = np.random.default_rng(20240820)
    Y = rng.normal(size=(num_samples, r))
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


class InvarianceReport:
    """Outcome of a sampled invariance check."""

    def __init__(self, max_violation, failing_directions, num_checked,
                 num_skipped, tol):
        self.max_violation = max_violation
        self.failing_directions = failing_directions
        self.num_checked = num_checked
        self.num_skipped = num_skipped
        self.tol = tol

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def __repr__(self):
        return (f"InvarianceReport(passed={self.passed}, "
                f"max_violation={self.max_violation:.3e}, "
                f"checked={self.num_checked}, skipped={self.num_skipped})")


def verify_algebraic_invariance(alg: AlgebraicSystem, template,
                                num_samples: int = 10000, tol: float = 1e-6,
                                directions=None) -> InvarianceReport:
    """Sample <z, C grad h(E'z)>, normalized by ||z|| ||C|| h(E'z).

    Directions with support below 1e-9 are skipped and counted; a reduced
    dimension of zero checks nothing and passes vacuously (full actuation).
    """
    r = alg.reduced_dimension
    if template.dimension != alg.dimension:
        raise ValueError("template dimension does not match the system")
    if r == 0:
        return InvarianceReport(0.0, [], 0, 0, tol)
    if directions is None:
        directions = unit_directions(r, num_samples)
    C_norm = float(np.linalg.norm(alg.C, 2))
    worst = 0.0
    failing = []
    checked = skipped = 0
    for z in directions:
        z = np.asarray(z, dtype=float)
        y = alg.E.T @ z
        h = template.support(y)
        if h <= 1e-9:
            skipped += 1
            continue
        checked += 1
        g = template.support_gradient(y)
        v = float(z @ alg.C @ g)
        denom = float(np.linalg.norm(z)) * C_norm * h
        nv = v / denom if denom > 0 else 0.0
        if nv > worst:
            worst = nv
        if nv > tol:
            failing.append(z.copy())
    return InvarianceReport(worst, failing, checked, skipped, tol)


def verify_controlled_invariance(cs: ControlSystem, template,
                                 num_samples: int = 10000, tol: float = 1e-6,
                                 directions=None) -> InvarianceReport:
    """Check inf_u <y, A x + B u> <= 0 at sampled exposed boundary points.

    When B'y is nonzero the infimum over u is -infinity and the direction
    passes outright; the binding directions are those annihilating B, where
    the check reduces to the algebraic one.
    """
    n = cs.dimension
    if template.dimension != n:
        raise ValueError("template dimension does not match the system")
    if directions is None:
        directions = unit_directions(n, num_samples)
    A_norm = float(np.linalg.norm(cs.A, 2))
    worst = 0.0
    failing = []
    checked = skipped = 0
    for y in directions:
        y = np.asarray(y, dtype=float)
        if float(np.linalg.norm(cs.B.T @ y)) > 1e-9:
            checked += 1
            continue
        h = template.support(y)
        if h <= 1e-9:
            skipped += 1
            continue
        checked += 1
        x = template.support_gradient(y)
        v = float(y @ cs.A @ x)
        denom = float(np.linalg.norm(y)) * A_norm * h
        nv = v / denom if denom > 0 else 0.0
        if nv > worst:
            worst = nv
        if nv > tol:
            failing.append(y.copy())
    return InvarianceReport(worst, failing, checked, skipped, tol)
