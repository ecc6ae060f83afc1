"""Property suites shared by the per-module tests and the acceptance gate.

Each suite returns a list of failure strings; an empty list means green.
Counts default to the full CI sizes.
"""

from __future__ import annotations

import itertools

import numpy as np

from invset.conic import (
    AffExpr, ConicProgram, export_sdpa, lincomb, parse_sdpa, solve_reference,
)
from invset.conditions import cone_nonpositivity, sos_constraint
from invset.geometry import complement_projection, sphere_partition
from invset.polynomials import HomogeneousPolynomial, evaluate, gradient, monomial_basis
from invset.synthesis import SynthesisProblem, TemplateSpec, benchmark_system, solve


def random_homogeneous(rng, num_vars: int, degree: int) -> HomogeneousPolynomial:
    basis = monomial_basis(num_vars, degree)
    coeffs = {e: float(rng.uniform(-1.0, 1.0)) for e in basis}
    return HomogeneousPolynomial(num_vars, degree, coeffs)


def euler_and_fd_suite(num_cases: int = 40) -> list[str]:
    rng = np.random.default_rng(20250816)
    failures = []
    for k in range(num_cases):
        n = int(rng.integers(2, 4))
        deg = int(rng.choice([2, 3, 4, 6, 8]))
        p = random_homogeneous(rng, n, deg)
        y = rng.normal(size=n)
        y /= np.linalg.norm(y)
        val = evaluate(p, y)
        g = np.array([evaluate(dp, y) for dp in gradient(p)])
        euler = float(y @ g)
        if abs(euler - deg * val) > 1e-10 * max(1.0, abs(deg * val)):
            failures.append(f"case {k}: Euler identity off by "
                            f"{abs(euler - deg * val):.2e}")
        h = 1e-6
        for i in range(n):
            step = np.zeros(n)
            step[i] = h
            fd = (evaluate(p, y + step) - evaluate(p, y - step)) / (2 * h)
            if abs(fd - g[i]) > 1e-6 * max(1.0, abs(g[i])):
                failures.append(f"case {k}: dp/dy_{i} finite-difference gap "
                                f"{abs(fd - g[i]):.2e}")
    return failures


def geometry_suite(num_samples: int = 100000) -> list[str]:
    failures = []
    rng = np.random.default_rng(20250817)

    for trial in range(12):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        B = rng.normal(size=(n, m))
        pi = complement_projection(B)
        r = pi.shape[0]
        if np.abs(pi @ B).max() > 1e-12:
            failures.append(f"projection trial {trial}: pi @ B = "
                            f"{np.abs(pi @ B).max():.2e}")
        if np.abs(pi @ pi.T - np.eye(r)).max() > 1e-12:
            failures.append(f"projection trial {trial}: pi pi' not identity")
        if r + np.linalg.matrix_rank(B) != n:
            failures.append(f"projection trial {trial}: rank defect")

    dirs = rng.normal(size=(num_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for m1, m2 in ((4, 3), (8, 5)):
        part = sphere_partition(m1, m2)
        membership = np.zeros((len(part), num_samples), dtype=bool)
        interior = np.zeros((len(part), num_samples), dtype=bool)
        for i, cone in enumerate(part.cones):
            vals = cone.normal_matrix @ dirs.T
            membership[i] = vals.min(axis=0) >= -1e-9
            interior[i] = vals.min(axis=0) > 1e-9
        uncovered = int((~membership.any(axis=0)).sum())
        if uncovered:
            failures.append(f"partition ({m1},{m2}): {uncovered} of "
                            f"{num_samples} directions uncovered")
        overlapped = int((interior.sum(axis=0) > 1).sum())
        if overlapped:
            failures.append(f"partition ({m1},{m2}): {overlapped} directions "
                            "strictly interior to two cones")
    return failures


def _feasible(prog: ConicProgram, max_iter: int = 4000) -> bool:
    sol = solve_reference(prog, max_iter=max_iter, eps_abs=1e-8, eps_rel=1e-8)
    return sol.status == "optimal"


def _random_decisive_symmetric(rng, side: int = 2) -> np.ndarray:
    # eigenvalues bounded away from zero so feasibility is unambiguous
    G = rng.normal(size=(side, side))
    V, _ = np.linalg.qr(G)
    lam = rng.uniform(0.1, 2.0, size=side) * rng.choice([-1.0, 1.0], size=side)
    return (V * lam) @ V.T


def sos_psd_suite(num_trials: int = 100) -> list[str]:
    failures = []
    rng = np.random.default_rng(20250818)
    for trial in range(num_trials):
        M = _random_decisive_symmetric(rng)
        q = HomogeneousPolynomial(2, 2, {(2, 0): M[0, 0],
                                         (1, 1): 2.0 * M[0, 1],
                                         (0, 2): M[1, 1]})
        prog = ConicProgram()
        sos_constraint(q, prog)
        feasible = _feasible(prog)
        psd = float(np.linalg.eigvalsh(M).min()) >= 0.0
        if feasible != psd:
            failures.append(f"trial {trial}: SOS feasible={feasible} but "
                            f"eigmin={np.linalg.eigvalsh(M).min():.3f}")
    return failures


def cone_soundness_suite(num_trials: int = 30,
                         num_samples: int = 10000) -> list[str]:
    failures = []
    rng = np.random.default_rng(20250819)
    feasible_seen = 0
    for trial in range(num_trials):
        a1 = rng.uniform(0.0, 2.0 * np.pi)
        a2 = a1 + rng.uniform(0.2, np.pi - 0.2)
        R = np.column_stack([[np.cos(a1), np.sin(a1)],
                             [np.cos(a2), np.sin(a2)]])
        M = _random_decisive_symmetric(rng) - rng.uniform(0.0, 1.5) * np.eye(2)
        prog = ConicProgram()
        M_expr = _constant_matrix(M)
        cone_nonpositivity(M_expr, R, prog)
        if not _feasible(prog):
            continue
        feasible_seen += 1
        w = rng.uniform(0.0, 1.0, size=(num_samples, 2))
        Z = w @ R.T
        Z /= np.maximum(np.linalg.norm(Z, axis=1, keepdims=True), 1e-12)
        vals = np.einsum("ki,ij,kj->k", Z, M, Z)
        if vals.max() > 1e-7:
            failures.append(f"trial {trial}: certificate accepted but "
                            f"max z'Mz = {vals.max():.2e} on the cone")
    if feasible_seen < 5:
        failures.append(f"only {feasible_seen} feasible cone trials; "
                        "suite lacks coverage")
    return failures


def _constant_matrix(M: np.ndarray):
    """Constant symmetric matrix as an AffExpr grid (no variables)."""
    side = M.shape[0]
    return [[AffExpr.constant(float(M[i, j])) for j in range(side)]
            for i in range(side)]


def _random_lp(rng):
    n = int(rng.integers(4, 9))
    m = int(rng.integers(2, 5))
    A = np.vstack([np.ones(n), rng.normal(size=(m - 1, n))])
    x0 = rng.uniform(0.1, 1.0, size=n)
    b = A @ x0
    c = rng.normal(size=n)
    return A, b, c


def _vertex_oracle(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    m, n = A.shape
    best = -np.inf
    for cols in itertools.combinations(range(n), m):
        sub = A[:, cols]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        xb = np.linalg.solve(sub, b)
        if xb.min() < -1e-9:
            continue
        x = np.zeros(n)
        x[list(cols)] = xb
        best = max(best, float(c @ x))
    return best


def lp_and_sdpa_suite(num_lps: int = 50, num_roundtrips: int = 50) -> list[str]:
    failures = []
    rng = np.random.default_rng(20250820)
    for trial in range(num_lps):
        A, b, c = _random_lp(rng)
        oracle = _vertex_oracle(A, b, c)
        if not np.isfinite(oracle):
            continue
        prog = ConicProgram()
        x = prog.add_nonneg(A.shape[1])
        for r in range(A.shape[0]):
            prog.add_equality(
                lincomb([(A[r, k], x.entry(k)) for k in range(A.shape[1])]),
                float(b[r]))
        prog.maximize(lincomb([(c[k], x.entry(k)) for k in range(A.shape[1])]))
        sol = solve_reference(prog, eps_abs=1e-9, eps_rel=1e-9)
        if sol.status != "optimal":
            failures.append(f"LP {trial}: status {sol.status}")
            continue
        if abs(sol.objective - oracle) > 1e-5:
            failures.append(f"LP {trial}: solver {sol.objective:.8f} vs "
                            f"vertex oracle {oracle:.8f}")

    for trial in range(num_roundtrips):
        prog = _random_program(rng)
        text = export_sdpa(prog)
        text2 = export_sdpa(parse_sdpa(text))
        if text != text2:
            failures.append(f"SDPA round-trip {trial}: bytes changed")
    return failures


def _random_program(rng) -> ConicProgram:
    prog = ConicProgram()
    blocks = []
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.choice(["nonneg", "psd", "free"])
        if kind == "psd":
            blocks.append(prog.add_psd(int(rng.integers(1, 4))))
        elif kind == "nonneg":
            blocks.append(prog.add_nonneg(int(rng.integers(1, 4))))
        else:
            blocks.append(prog.add_free(int(rng.integers(1, 3))))
    n = prog.num_vars
    for _ in range(int(rng.integers(1, 5))):
        ks = rng.choice(n, size=min(n, int(rng.integers(1, 4))), replace=False)
        expr = lincomb([(float(rng.normal()), _raw_var(prog, int(k)))
                        for k in ks])
        prog.add_equality(expr, float(rng.normal()))
    ks = rng.choice(n, size=min(n, 3), replace=False)
    prog.maximize(lincomb([(float(rng.normal()), _raw_var(prog, int(k)))
                           for k in ks]))
    return prog


def _raw_var(prog: ConicProgram, k: int):
    return AffExpr({k: 1.0})


def scale_covariance_suite() -> list[str]:
    failures = []
    system = benchmark_system()
    for kind, kw in (("ellipsoid", {}), ("piecewise", {"m1": 4, "m2": 3})):
        spec = TemplateSpec(kind, **kw)
        base = solve(SynthesisProblem(system, spec))
        scaled = solve(SynthesisProblem(
            system, TemplateSpec(kind, **kw),
            safe_box=[(-2.0, 2.0)] * 3))
        gap = abs(scaled.gamma - 2.0 * base.gamma)
        if gap > 1e-4:
            failures.append(f"{spec.label}: gamma({{2 box}}) = {scaled.gamma:.8f} "
                            f"vs 2 gamma = {2 * base.gamma:.8f} (gap {gap:.2e})")
    return failures
