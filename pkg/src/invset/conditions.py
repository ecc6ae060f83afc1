"""Compile invariance and validity certificates into conic constraints.

Every operation here appends variables and equality rows to a ConicProgram
and returns a ConstraintBlock describing what it added. Polynomial-valued
constraints work over "affine polynomials": dicts mapping exponent tuples to
AffExpr coefficients, so a polynomial whose coefficients are themselves
decision variables (or combinations of Gram entries) flows through gradient,
pullback, and SOS matching without special cases.

The piecewise copositivity relaxation is the first-level S + N congruence:
z'Mz <= 0 on cone(R) is certified by -R'MR = S + N with S positive
semidefinite and N entrywise nonnegative. For the planar (r = 2) cones this
relaxation is exact, which is what makes the piecewise gamma values sharp.
"""

from __future__ import annotations

import numpy as np

from .conic import AffExpr, ConicProgram, VarBlock, lincomb
from .geometry import oriented_facet_normal, pulled_back_cone
from .polynomials import HomogeneousPolynomial, monomial_basis, pullback
from .systems import AlgebraicSystem


class ConstraintBlock:
    """Record of one certificate's footprint in a program."""

    def __init__(self, name: str, variables=None, row_range=(0, 0), notes=""):
        self.name = name
        self.variables: list[VarBlock] = list(variables or [])
        self.row_range = row_range
        self.notes = notes

    @property
    def num_rows(self) -> int:
        return self.row_range[1] - self.row_range[0]

    def __repr__(self):
        return (f"ConstraintBlock({self.name!r}, vars={len(self.variables)}, "
                f"rows={self.num_rows})")


AffinePolynomial = dict  # exponent tuple -> AffExpr


def constant_polynomial(p: HomogeneousPolynomial) -> AffinePolynomial:
    return {e: AffExpr.constant(c) for e, c in p.items()}


def quadratic_form_polynomial(Q_entry, n: int) -> AffinePolynomial:
    """y'Qy as an affine polynomial; Q_entry(i, j) supplies the entries."""
    out: AffinePolynomial = {}
    for i in range(n):
        for j in range(i, n):
            e = tuple(2 if k == i else 0 for k in range(n)) if i == j else \
                tuple(1 if k in (i, j) else 0 for k in range(n))
            coeff = Q_entry(i, j) if i == j else 2.0 * Q_entry(i, j)
            out[e] = out.get(e, AffExpr()) + coeff
    return out


def _sym_entry(M_expr, a: int, b: int) -> AffExpr:
    return M_expr[a][b]


def _matrix_equals_psd(prog: ConicProgram, M_expr, side: int, negate: bool,
                       name: str) -> ConstraintBlock:
    """Tie a symmetric AffExpr matrix (or its negation) to a fresh PSD block."""
    row_start = len(prog.rows)
    T = prog.add_psd(side)
    sign = -1.0 if negate else 1.0
    for a in range(side):
        for b in range(a, side):
            prog.add_equality(T.matrix_entry(a, b) - sign * M_expr[a][b])
    return ConstraintBlock(name, [T], (row_start, len(prog.rows)))


def ellipsoid_invariance(alg: AlgebraicSystem, Q: VarBlock,
                         prog: ConicProgram) -> ConstraintBlock:
    """-(CQE' + EQC') positive semidefinite; empty when r = 0."""
    r, n = alg.E.shape
    if Q.kind != "psd" or Q.side != n:
        raise ValueError(f"Q must be a PSD block of side {n}")
    if r == 0:
        return ConstraintBlock("ellipsoid-invariance", [],
                               (len(prog.rows), len(prog.rows)),
                               notes="r = 0, trivially invariant")
    M = [[lincomb([(alg.C[a, i] * alg.E[b, j] + alg.E[a, i] * alg.C[b, j],
                    Q.matrix_entry(i, j))
                   for i in range(n) for j in range(n)])
          for b in range(r)] for a in range(r)]
    return _matrix_equals_psd(prog, M, r, True, "ellipsoid-invariance")


def ellipsoid_linear_feedback(cs, Q: VarBlock, Y: VarBlock,
                              prog: ConicProgram) -> ConstraintBlock:
    """-(QA' + AQ + Y'B' + BY) positive semidefinite, Y the m x n gain."""
    n = cs.dimension
    m = cs.B.shape[1]
    if Q.kind != "psd" or Q.side != n:
        raise ValueError(f"Q must be a PSD block of side {n}")
    if Y.size != m * n:
        raise ValueError(f"Y must hold {m}x{n} entries")

    def y_entry(u, i):
        return AffExpr({Y.offset + u * n + i: 1.0})

    M = []
    for a in range(n):
        row = []
        for b in range(n):
            pairs = [(cs.A[b, j], Q.matrix_entry(a, j)) for j in range(n)]
            pairs += [(cs.A[a, i], Q.matrix_entry(i, b)) for i in range(n)]
            expr = lincomb(pairs)
            for u in range(m):
                expr = expr + cs.B[b, u] * y_entry(u, a) + cs.B[a, u] * y_entry(u, b)
            row.append(expr)
        M.append(row)
    return _matrix_equals_psd(prog, M, n, True, "linear-feedback")


def autonomous_ellipsoid(A, P: VarBlock, prog: ConicProgram) -> ConstraintBlock:
    """-(A'P + PA) positive semidefinite for the autonomous flow x' = Ax."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if P.kind != "psd" or P.side != n:
        raise ValueError(f"P must be a PSD block of side {n}")
    M = [[lincomb([(A[i, a], P.matrix_entry(i, b)) for i in range(n)] +
                  [(A[j, b], P.matrix_entry(a, j)) for j in range(n)])
          for b in range(n)] for a in range(n)]
    return _matrix_equals_psd(prog, M, n, True, "autonomous-ellipsoid")


def sos_constraint(q, prog: ConicProgram, num_vars: int | None = None,
                   degree: int | None = None,
                   name: str = "sos") -> ConstraintBlock:
    """q(z) = m(z)'G m(z) with G a fresh PSD Gram block.

    q is a HomogeneousPolynomial (dimensions inferred) or an affine
    polynomial dict, in which case num_vars and degree are required. One
    equality row per monomial of the given (even) degree: the sum of the
    Gram entries whose basis exponents add to that monomial, off-diagonal
    pairs counted twice, equals q's coefficient (zero when q omits it).
    """
    if isinstance(q, HomogeneousPolynomial):
        num_vars, degree = q.num_vars, q.degree
        q = constant_polynomial(q)
    if num_vars is None or degree is None:
        raise ValueError("num_vars and degree are required for dict input")
    if degree % 2 != 0:
        raise ValueError(f"SOS constraint needs even degree, got {degree}")
    for e in q:
        if len(e) != num_vars or sum(e) != degree:
            raise ValueError(f"monomial {e} is not degree {degree} "
                             f"in {num_vars} variables")
    half = monomial_basis(num_vars, degree // 2)
    full = monomial_basis(num_vars, degree)
    row_start = len(prog.rows)
    G = prog.add_psd(len(half))
    by_exponent: dict[tuple, list[tuple[float, AffExpr]]] = {e: [] for e in full}
    for a in range(len(half)):
        ea = half[a]
        for b in range(a, len(half)):
            e = tuple(x + y for x, y in zip(ea, half[b]))
            mult = 1.0 if a == b else 2.0
            by_exponent[e].append((mult, G.matrix_entry(a, b)))
    for e in full:
        expr = lincomb(by_exponent[e])
        qe = q.get(e)
        if qe is not None:
            expr = expr - qe
        prog.add_equality(expr)
    return ConstraintBlock(name, [G], (row_start, len(prog.rows)))


def gram_polynomial(G: VarBlock, basis) -> AffinePolynomial:
    """The polynomial m'Gm as affine coefficients over G's entries.

    Defining a polynomial this way (instead of free coefficient variables
    tied to a Gram by rows) keeps it SOS by construction for every iterate a
    first-order solver returns, which is what downstream soundness checks
    rely on.
    """
    mons = list(basis)
    out: AffinePolynomial = {}
    for a in range(len(mons)):
        for b in range(a, len(mons)):
            e = tuple(x + y for x, y in zip(mons[a], mons[b]))
            mult = 1.0 if a == b else 2.0
            out[e] = out.get(e, AffExpr()) + mult * G.matrix_entry(a, b)
    return out


def affine_pullback(p: AffinePolynomial, num_vars: int, degree: int,
                    M: np.ndarray) -> AffinePolynomial:
    """p(Mw) for an affine polynomial p; M has num_vars rows."""
    rows = [list(row) for row in np.asarray(M, dtype=float)]
    out: AffinePolynomial = {}
    for e, ce in p.items():
        mono = HomogeneousPolynomial(num_vars, degree, {e: 1.0})
        for pe, pc in pullback(mono, rows).items():
            if pc != 0.0:
                out[pe] = out.get(pe, AffExpr()) + pc * ce
    return out


def affine_gradient_pullback(p: AffinePolynomial, num_vars: int, degree: int,
                             C: np.ndarray, ET: np.ndarray) -> AffinePolynomial:
    """q(z) = -<z, C (grad p)(E'z)> with p's coefficients affine.

    Expands per p-monomial: each float-coefficient pullback polynomial of a
    partial derivative is computed exactly, then scaled by the monomial's
    AffExpr coefficient.
    """
    r = ET.shape[1]
    out: AffinePolynomial = {}
    rows_ET = [list(row) for row in ET]
    for e, ce in p.items():
        base: dict[tuple, float] = {}
        for i in range(num_vars):
            if e[i] == 0:
                continue
            de = tuple(x - (1 if k == i else 0) for k, x in enumerate(e))
            mono = HomogeneousPolynomial(num_vars, degree - 1, {de: 1.0})
            pulled = pullback(mono, rows_ET)
            for a in range(r):
                w = -float(C[a, i]) * e[i]
                if w == 0.0:
                    continue
                for pe, pc in pulled.items():
                    ze = tuple(x + (1 if k == a else 0) for k, x in enumerate(pe))
                    base[ze] = base.get(ze, 0.0) + w * pc
        for ze, f in base.items():
            if f != 0.0:
                out[ze] = out.get(ze, AffExpr()) + f * ce
    return out


def polyset_invariance(alg: AlgebraicSystem, p: AffinePolynomial, degree: int,
                       prog: ConicProgram) -> ConstraintBlock:
    """SOS certificate for -<z, C grad p(E'z)> >= 0 over z in R^r."""
    r, n = alg.E.shape
    if r == 0:
        return ConstraintBlock("polyset-invariance", [],
                               (len(prog.rows), len(prog.rows)),
                               notes="r = 0, trivially invariant")
    q = affine_gradient_pullback(p, n, degree, alg.C, alg.E.T)
    return sos_constraint(q, prog, r, degree, name="polyset-invariance")


def cone_nonpositivity(M_expr, R: np.ndarray, prog: ConicProgram,
                       name: str = "cone-nonpositivity",
                       level: int = 1) -> ConstraintBlock:
    """Certify z'Mz <= 0 on cone(R) via -R'MR = S + N, S PSD, N >= 0.

    level reserves room for a future congruence hierarchy; only the first
    level exists. An empty R (pullback collapsed to {0}) adds nothing.
    """
    if level != 1:
        raise NotImplementedError("only the first congruence level is implemented")
    k = R.shape[1] if R.size else 0
    if k == 0:
        return ConstraintBlock(name, [], (len(prog.rows), len(prog.rows)),
                               notes="trivial cone, no constraint")
    row_start = len(prog.rows)
    side = len(M_expr)
    S = prog.add_psd(k)
    N = prog.add_nonneg(k * (k + 1) // 2)
    idx = 0
    for a in range(k):
        for b in range(a, k):
            expr = lincomb([(R[i, a] * R[j, b], M_expr[i][j])
                            for i in range(side) for j in range(side)])
            prog.add_equality(expr + S.matrix_entry(a, b) + N.entry(idx))
            idx += 1
    return ConstraintBlock(name, [S, N], (row_start, len(prog.rows)))


def invariance_form(alg: AlgebraicSystem, Q: VarBlock):
    """Entries of CQE' + EQC' as an r x r AffExpr matrix."""
    r, n = alg.E.shape
    return [[lincomb([(alg.C[a, i] * alg.E[b, j] + alg.E[a, i] * alg.C[b, j],
                       Q.matrix_entry(i, j))
                      for i in range(n) for j in range(n)])
             for b in range(r)] for a in range(r)]


def piecewise_invariance(alg: AlgebraicSystem, partition, Q_blocks,
                         prog: ConicProgram) -> ConstraintBlock:
    """Per-cone invariance on the pulled-back cones K_i = {z : E'z in P_i}.

    Pieces whose pullback collapses to {0} impose nothing (no direction z
    ever lands in them); a half-plane pullback carries an extra interior
    generator from the geometry helper, so lineality needs no special casing
    here.
    """
    if len(Q_blocks) != len(partition):
        raise ValueError("one Q block per cone required")
    r = alg.reduced_dimension
    if r == 0:
        return ConstraintBlock("piecewise-invariance", [],
                               (len(prog.rows), len(prog.rows)),
                               notes="r = 0, trivially invariant")
    row_start = len(prog.rows)
    variables = []
    skipped = []
    for i, cone in enumerate(partition.cones):
        R = pulled_back_cone(cone, alg.E.T)
        if R.size == 0 or R.shape[1] == 0:
            skipped.append(i)
            continue
        M = invariance_form(alg, Q_blocks[i])
        blk = cone_nonpositivity(M, R, prog, name=f"piece-{i}-invariance")
        variables.extend(blk.variables)
    notes = f"skipped empty pullbacks: {skipped}" if skipped else ""
    return ConstraintBlock("piecewise-invariance", variables,
                           (row_start, len(prog.rows)), notes)


def piecewise_continuity(partition, Q_blocks,
                         prog: ConicProgram) -> ConstraintBlock:
    """B'(Qi - Qj)B = 0 across every shared facet, upper triangle rows."""
    row_start = len(prog.rows)
    for i, j, B in partition.adjacency:
        k = B.shape[1]
        for a in range(k):
            for b in range(a, k):
                expr = lincomb(
                    [(B[s, a] * B[t, b], Q_blocks[i].matrix_entry(s, t))
                     for s in range(B.shape[0]) for t in range(B.shape[0])] +
                    [(-B[s, a] * B[t, b], Q_blocks[j].matrix_entry(s, t))
                     for s in range(B.shape[0]) for t in range(B.shape[0])])
                prog.add_equality(expr)
    return ConstraintBlock("piecewise-continuity", [],
                           (row_start, len(prog.rows)))


def piecewise_gradient_jump(partition, Q_blocks, prog: ConicProgram) -> ConstraintBlock:
    """Convexity across facets: the support gradient may only rotate outward.

    For each shared facet with inward orientation nu (from piece i toward
    piece j), require nu'(Qj - Qi)a >= 0 for both facet rays a. Together with
    per-piece positive semidefiniteness this makes the piecewise support
    function convex; continuity makes the jump well defined.
    """
    row_start = len(prog.rows)
    variables = []
    for i, j, B in partition.adjacency:
        nu = oriented_facet_normal(partition, i, j, B)
        slack = prog.add_nonneg(B.shape[1])
        variables.append(slack)
        for col in range(B.shape[1]):
            a = B[:, col]
            expr = lincomb(
                [(nu[s] * a[t], Q_blocks[j].matrix_entry(s, t))
                 for s in range(3) for t in range(3)] +
                [(-nu[s] * a[t], Q_blocks[i].matrix_entry(s, t))
                 for s in range(3) for t in range(3)])
            prog.add_equality(expr - slack.entry(col))
    return ConstraintBlock("piecewise-gradient-jump", variables,
                           (row_start, len(prog.rows)))


def hessian_form(p: AffinePolynomial, num_vars: int, degree: int) -> AffinePolynomial:
    """w' grad^2 p(y) w over joint variables (y..., w...), coefficients affine."""
    out: AffinePolynomial = {}
    for e, ce in p.items():
        for i in range(num_vars):
            for j in range(num_vars):
                if i == j:
                    f = e[i] * (e[i] - 1)
                    if f == 0:
                        continue
                    de = list(e)
                    de[i] -= 2
                else:
                    f = e[i] * e[j]
                    if f == 0:
                        continue
                    de = list(e)
                    de[i] -= 1
                    de[j] -= 1
                we = [0] * num_vars
                we[i] += 1
                we[j] += 1
                joint = tuple(de) + tuple(we)
                out[joint] = out.get(joint, AffExpr()) + float(f) * ce
    return out


def sos_convexity(p: AffinePolynomial, num_vars: int, degree: int,
                  prog: ConicProgram) -> ConstraintBlock:
    """SOS certificate for the Hessian form of p, bihomogeneous Gram basis.

    The Gram basis pairs degree d-1 monomials in y with single w factors, so
    the certificate matches the Hessian form's bidegree (2d-2 in y, 2 in w)
    exactly instead of mixing in irrelevant joint monomials.
    """
    if degree < 2:
        raise ValueError("convexity constraint needs degree >= 2")
    H = hessian_form(p, num_vars, degree)
    ybasis = monomial_basis(num_vars, degree // 2 - 1)
    joint = [tuple(e) + tuple(1 if k == j else 0 for k in range(num_vars))
             for e in ybasis for j in range(num_vars)]
    row_start = len(prog.rows)
    G = prog.add_psd(len(joint))
    by_exponent: dict[tuple, list[tuple[float, AffExpr]]] = {}
    for a in range(len(joint)):
        for b in range(a, len(joint)):
            e = tuple(x + y for x, y in zip(joint[a], joint[b]))
            mult = 1.0 if a == b else 2.0
            by_exponent.setdefault(e, []).append((mult, G.matrix_entry(a, b)))
    exponents = set(by_exponent) | set(H)
    for e in sorted(exponents, reverse=True):
        expr = lincomb(by_exponent.get(e, []))
        he = H.get(e)
        if he is not None:
            expr = expr - he
        prog.add_equality(expr)
    return ConstraintBlock("sos-convexity", [G], (row_start, len(prog.rows)))
