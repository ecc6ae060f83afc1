"""Conic-program representation, a reference first-order solver, SDPA exchange.

Programs live over a single flat variable vector partitioned into free,
nonnegative, and PSD blocks. Symmetric matrices are vectorized over the upper
triangle with sqrt(2) scaling on off-diagonal entries, which makes the
vectorization an isometry: inner products and norms of svec vectors equal the
Frobenius ones, so residual scaling never needs per-entry weights.

The reference solver is ADMM over the splitting {Ax = b} / product cone with
over-relaxation and scaled termination. It is deliberately simple and fully
deterministic: fixed iteration order, no randomization, no asynchronous
updates. Identical inputs produce bitwise-identical iterates. Returned values
are taken from the cone-projected iterate, so PSD blocks of a returned
solution are positive semidefinite up to eigendecomposition roundoff even
when the equality residual is only at solver tolerance.

SDPA sparse export writes the program in .dat-s convention (our maximization
over the product cone is exactly SDPA's dual side). Free scalars are split
into differences of two nonnegative entries on export; synthesis programs are
built without free scalars, so their exports round-trip structurally intact.
"""

from __future__ import annotations

import math

import numpy as np

ROOT2 = math.sqrt(2.0)


class AffExpr:
    """Affine expression c0 + sum coeff_i * x_i over program variables."""

    __slots__ = ("terms", "const")

    def __init__(self, terms=None, const: float = 0.0):
        self.terms: dict[int, float] = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def constant(value: float) -> "AffExpr":
        return AffExpr(None, value)

    def copy(self) -> "AffExpr":
        return AffExpr(self.terms, self.const)

    def add_term(self, index: int, coeff: float) -> None:
        if coeff == 0.0:
            return
        c = self.terms.get(index, 0.0) + coeff
        if c == 0.0:
            self.terms.pop(index, None)
        else:
            self.terms[index] = c

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, AffExpr):
            for k, v in other.terms.items():
                out.add_term(k, v)
            out.const += other.const
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self):
        return AffExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other):
        if isinstance(other, AffExpr):
            return self + (-other)
        return self + (-float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, s):
        s = float(s)
        if s == 0.0:
            return AffExpr()
        return AffExpr({k: v * s for k, v in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(v * x[k] for k, v in self.terms.items())

    def __repr__(self):
        return f"AffExpr({len(self.terms)} terms, const={self.const})"


def lincomb(pairs) -> AffExpr:
    """Sum of coeff * expr without quadratic dict copying."""
    out = AffExpr()
    for coeff, expr in pairs:
        coeff = float(coeff)
        if coeff == 0.0:
            continue
        if isinstance(expr, AffExpr):
            for k, v in expr.terms.items():
                out.add_term(k, coeff * v)
            out.const += coeff * expr.const
        else:
            out.const += coeff * float(expr)
    return out


def svec_len(side: int) -> int:
    return side * (side + 1) // 2


def svec_index(side: int, i: int, j: int) -> int:
    """Position of (i, j), i <= j, in row-major upper-triangle order."""
    if not 0 <= i <= j < side:
        raise IndexError(f"({i},{j}) outside upper triangle of side {side}")
    return i * side - i * (i - 1) // 2 + (j - i)


_SVEC_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _svec_indices(side: int):
    cached = _SVEC_CACHE.get(side)
    if cached is None:
        iu, ju = np.triu_indices(side)
        w = np.where(iu == ju, 1.0, ROOT2)
        cached = (iu, ju, w)
        _SVEC_CACHE[side] = cached
    return cached


def svec(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    iu, ju, w = _svec_indices(M.shape[0])
    return M[iu, ju] * w


def smat(v: np.ndarray, side: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size != svec_len(side):
        raise ValueError(f"svec length {v.size} does not match side {side}")
    iu, ju, w = _svec_indices(side)
    M = np.zeros((side, side))
    M[iu, ju] = v / w
    M[ju, iu] = M[iu, ju]
    return M


def psd_project(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix."""
    S = (M + M.T) / 2.0
    w, V = np.linalg.eigh(S)
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T


class VarBlock:
    """Handle to one variable block; produces AffExpr views of its entries."""

    __slots__ = ("kind", "offset", "size", "side")

    def __init__(self, kind: str, offset: int, size: int, side: int = 0):
        self.kind = kind
        self.offset = offset
        self.size = size
        self.side = side

    def entry(self, i: int) -> AffExpr:
        if self.kind == "psd":
            raise TypeError("use matrix_entry(i, j) for PSD blocks")
        if not 0 <= i < self.size:
            raise IndexError(i)
        return AffExpr({self.offset + i: 1.0})

    def matrix_entry(self, i: int, j: int) -> AffExpr:
        if self.kind != "psd":
            raise TypeError("matrix_entry only applies to PSD blocks")
        if i > j:
            i, j = j, i
        k = self.offset + svec_index(self.side, i, j)
        return AffExpr({k: 1.0 if i == j else 1.0 / ROOT2})

    def __repr__(self):
        extra = f", side={self.side}" if self.kind == "psd" else ""
        return f"VarBlock({self.kind}, offset={self.offset}, size={self.size}{extra})"


class ConicProgram:
    """maximize c'x + c0 subject to Ax = b, x in Free x Nonneg x PSD blocks."""

    def __init__(self):
        self.blocks: list[VarBlock] = []
        self.num_vars = 0
        self.rows: list[dict[int, float]] = []
        self.rhs: list[float] = []
        self.objective = AffExpr()

    def _add_block(self, kind: str, size: int, side: int = 0) -> VarBlock:
        blk = VarBlock(kind, self.num_vars, size, side)
        self.blocks.append(blk)
        self.num_vars += size
        return blk

    def add_free(self, n: int = 1) -> VarBlock:
        if n < 1:
            raise ValueError("need at least one variable")
        return self._add_block("free", n)

    def add_nonneg(self, n: int = 1) -> VarBlock:
        if n < 1:
            raise ValueError("need at least one variable")
        return self._add_block("nonneg", n)

    def add_psd(self, side: int) -> VarBlock:
        if side < 1:
            raise ValueError("PSD block side must be >= 1")
        return self._add_block("psd", svec_len(side), side)

    def add_equality(self, lhs: AffExpr, rhs: float = 0.0) -> None:
        if not isinstance(lhs, AffExpr):
            raise TypeError("equality left-hand side must be an AffExpr")
        for k in lhs.terms:
            if not 0 <= k < self.num_vars:
                raise ValueError(f"coefficient references unknown variable {k}")
        self.rows.append(dict(lhs.terms))
        self.rhs.append(float(rhs) - lhs.const)

    def maximize(self, expr: AffExpr) -> None:
        for k in expr.terms:
            if not 0 <= k < self.num_vars:
                raise ValueError(f"objective references unknown variable {k}")
        self.objective = expr.copy()

    # dense data for the solver and the checker
    def matrices(self):
        m, n = len(self.rows), self.num_vars
        A = np.zeros((m, n))
        for r, row in enumerate(self.rows):
            for k, v in row.items():
                A[r, k] = v
        b = np.array(self.rhs, dtype=float)
        c = np.zeros(n)
        for k, v in self.objective.terms.items():
            c[k] = v
        return A, b, c

    def sparse_matrix(self):
        from scipy.sparse import csr_matrix
        rows_idx, cols_idx, vals = [], [], []
        for r, row in enumerate(self.rows):
            for k, v in row.items():
                rows_idx.append(r)
                cols_idx.append(k)
                vals.append(v)
        return csr_matrix((vals, (rows_idx, cols_idx)),
                          shape=(len(self.rows), self.num_vars))

    def project_cone(self, v: np.ndarray) -> np.ndarray:
        out = v.copy()
        for blk in self.blocks:
            sl = slice(blk.offset, blk.offset + blk.size)
            if blk.kind == "nonneg":
                np.maximum(out[sl], 0.0, out=out[sl])
            elif blk.kind == "psd":
                out[sl] = svec(psd_project(smat(v[sl], blk.side)))
        return out

    def cone_violation(self, x: np.ndarray) -> float:
        worst = 0.0
        for blk in self.blocks:
            sl = slice(blk.offset, blk.offset + blk.size)
            if blk.kind == "nonneg":
                worst = max(worst, float(-(x[sl].min(initial=0.0))))
            elif blk.kind == "psd":
                w = np.linalg.eigvalsh(smat(x[sl], blk.side))
                worst = max(worst, float(-w.min()))
        return worst


class Solution:
    """Solver output: status plus values and independently meaningful residuals.

    status is one of optimal, inaccurate, iteration-limit, infeasible-certified.
    x is None exactly when infeasible-certified. Residuals are always filled.
    """

    def __init__(self, status, x, objective, primal_residual, dual_residual,
                 cone_violation, iterations=0, y=None, trace=None,
                 u=None, rho=None):
        self.status = status
        self.x = x
        self.objective = objective
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        self.cone_violation = cone_violation
        self.iterations = iterations
        self.y = y
        self.trace = trace
        # final scaled dual iterate and penalty, so a second call can resume
        self.u = u
        self.rho = rho

    def value(self, block: VarBlock):
        if self.x is None:
            raise ValueError("solution carries no values (infeasible-certified)")
        v = self.x[block.offset:block.offset + block.size]
        if block.kind == "psd":
            return smat(v, block.side)
        if block.size == 1:
            return float(v[0])
        return v.copy()

    def __repr__(self):
        obj = "None" if self.objective is None else f"{self.objective:.6g}"
        return (f"Solution({self.status}, objective={obj}, "
                f"primal={self.primal_residual:.2e}, dual={self.dual_residual:.2e}, "
                f"cone={self.cone_violation:.2e}, iterations={self.iterations})")


def solve_reference(prog: ConicProgram, max_iter: int = 200000,
                    eps_abs: float = 1e-6, eps_rel: float = 1e-6,
                    rho: float = 1.0, check_every: int = 25,
                    record_trace: bool = False,
                    z0: np.ndarray | None = None,
                    u0: np.ndarray | None = None) -> Solution:
    """ADMM on the affine-set / cone splitting with over-relaxation 1.5.

    Rows are equilibrated to unit norm internally before factorization; this
    leaves the feasible set and the iterates unchanged but keeps the AA'
    eigendecomposition well conditioned. Structurally inconsistent equalities
    (nonzero least-squares residual) yield infeasible-certified before any
    iteration. Otherwise the loop stops
    at optimal when consensus, dual, and objective-gap residuals all pass the
    scaled test; at the iteration cap the status is inaccurate when every
    residual is within a factor 100 of its tolerance and iteration-limit when
    not. The penalty parameter follows a deterministic residual-balancing
    rule, so reruns reproduce iterates exactly. Passing z0/u0 (and rho)
    resumes from a previous solution's final iterate, which is how staged
    schedules hand a warm point from one objective scaling to the next.
    """
    A = prog.sparse_matrix()
    b = np.array(prog.rhs, dtype=float)
    c = np.zeros(prog.num_vars)
    for k, v in prog.objective.terms.items():
        c[k] = v
    m, n = A.shape
    if n == 0:
        raise ValueError("program has no variables")

    if m > 0:
        # equilibrate rows to unit norm before factoring; the affine set
        # {Ax = b} is unchanged, but the eigenvalue cutoff below stops
        # discarding genuine directions when row norms span several orders
        # of magnitude (high-degree coefficient rows carry multinomial
        # weights)
        row_norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
        scale = np.where(row_norms > 1e-300, row_norms, 1.0)
        As = A.multiply((1.0 / scale)[:, None]).tocsr()
        bs = b / scale
        # pseudo-inverse of AA' via eigendecomposition (handles redundant
        # rows); the affine projection then costs two sparse matvecs plus a
        # dense m x m apply per iteration
        M = (As @ As.T).toarray()
        lam, W = np.linalg.eigh(M)
        lam_max = lam[-1] if lam.size else 0.0
        inv_lam = np.zeros_like(lam)
        keep = lam > 1e-12 * max(lam_max, 1e-300)
        inv_lam[keep] = 1.0 / lam[keep]

        def pinv_M(r):
            return W @ (inv_lam * (W.T @ r))

        AT = As.T.tocsr()
        x0 = AT @ pinv_M(bs)
        feas_residual = float(np.abs(As @ x0 - bs).max())
        if feas_residual > 1e-8 * (1.0 + float(np.abs(bs).max())):
            return Solution("infeasible-certified", None, None,
                            feas_residual, 0.0, 0.0)

        def proj_affine(v):
            return v - AT @ pinv_M(As @ v - bs)
    else:
        def proj_affine(v):
            return v

    sqrt_n = math.sqrt(n)
    x = np.zeros(n)
    z = np.zeros(n) if z0 is None else np.asarray(z0, dtype=float).copy()
    z_prev = z
    u = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float).copy()
    if z.shape != (n,) or u.shape != (n,):
        raise ValueError("warm start vectors must match the variable count")
    trace = [] if record_trace else None
    it = 0
    ratios = (math.inf, math.inf, math.inf)

    while it < max_iter:
        it += 1
        x = proj_affine(z - u + c / rho)
        x_hat = 1.5 * x - 0.5 * z
        z_prev = z
        z = prog.project_cone(x_hat + u)
        u = u + x_hat - z

        if it % check_every == 0 or it == max_iter:
            rp = float(np.linalg.norm(x - z))
            ep = sqrt_n * eps_abs + eps_rel * max(np.linalg.norm(x), np.linalg.norm(z))
            rd = rho * float(np.linalg.norm(z - z_prev))
            ed = sqrt_n * eps_abs + eps_rel * rho * float(np.linalg.norm(u))
            cx, cz = float(c @ x), float(c @ z)
            rg = abs(cx - cz)
            eg = eps_abs + eps_rel * max(abs(cx), abs(cz))
            ratios = (rp / ep, rd / ed, rg / eg)
            if trace is not None:
                trace.append((it, rp, rd, rg, rho, cz))
            if max(ratios) <= 1.0:
                break
            # deterministic residual balancing; the affine projection does
            # not depend on rho, so no refactorization is needed
            if rp * ed > 10.0 * rd * ep and rho < 1e4:
                rho *= 2.0
                u /= 2.0
            elif rd * ep > 10.0 * rp * ed and rho > 1e-4:
                rho /= 2.0
                u *= 2.0

    if max(ratios) <= 1.0:
        status = "optimal"
    elif max(ratios) <= 100.0:
        status = "inaccurate"
    else:
        status = "iteration-limit"

    primal = float(np.abs(A @ z - b).max()) if m else 0.0
    dual = rho * float(np.abs(z - z_prev).max())
    # least-squares multiplier for the original rows: A' y = As' ys with
    # ys the scaled-system estimate, so y = ys / scale
    y = pinv_M(As @ (c - rho * u)) / scale if m > 0 else np.zeros(0)
    return Solution(status, z.copy(), float(c @ z) + prog.objective.const,
                    primal, dual, prog.cone_violation(z),
                    iterations=it, y=y, trace=trace, u=u.copy(), rho=rho)


class CheckReport:
    """Independent feasibility recheck of a solution against its program."""

    def __init__(self, passed, equality_residual, min_psd_eig, min_nonneg,
                 failed_blocks, note=""):
        self.passed = passed
        self.equality_residual = equality_residual
        self.min_psd_eig = min_psd_eig
        self.min_nonneg = min_nonneg
        self.failed_blocks = failed_blocks
        self.note = note

    def __repr__(self):
        if self.passed is None:
            return f"CheckReport({self.note})"
        return (f"CheckReport(passed={self.passed}, eq={self.equality_residual:.2e}, "
                f"min_psd_eig={self.min_psd_eig:.2e}, min_nonneg={self.min_nonneg:.2e})")


def check_solution(prog: ConicProgram, sol: Solution, tol: float = 1e-6) -> CheckReport:
    """Recompute ||Ax-b||_inf, PSD block eigenvalue floors, nonneg floors."""
    if sol.x is None:
        return CheckReport(None, None, None, None, [], note="no values")
    A, b, _ = prog.matrices()
    eq = float(np.abs(A @ sol.x - b).max()) if len(b) else 0.0
    min_eig = math.inf
    min_nn = math.inf
    failed = []
    for idx, blk in enumerate(prog.blocks):
        v = sol.x[blk.offset:blk.offset + blk.size]
        if blk.kind == "psd":
            w = float(np.linalg.eigvalsh(smat(v, blk.side)).min())
            min_eig = min(min_eig, w)
            if w < -tol:
                failed.append(idx)
        elif blk.kind == "nonneg":
            w = float(v.min())
            min_nn = min(min_nn, w)
            if w < -tol:
                failed.append(idx)
    if eq > tol:
        failed.append(-1)
    passed = not failed
    if min_eig is math.inf:
        min_eig = 0.0
    if min_nn is math.inf:
        min_nn = 0.0
    return CheckReport(passed, eq, min_eig, min_nn, failed)


# ---------------------------------------------------------------------------
# SDPA sparse format. Our program "maximize c'x, Ax = b, x in cone product"
# is the SDPA dual: max tr(F0 Y) s.t. tr(Fk Y) = c_k, Y >= 0 blockwise, so
# the exported primal objective vector is our right-hand side and each of our
# equality rows becomes one Fk. Off-diagonal svec coefficients divide by
# sqrt(2) on the way out (tr counts those entries twice at matrix scale).
# ---------------------------------------------------------------------------


def _sdpa_layout(prog: ConicProgram):
    """Block table and per-variable entry map for the .dat-s rendering.

    Returns (block_sizes, entries) where entries[var_index] is a list of
    (block_no, i, j, scale): the file-level coefficient of that variable in a
    matrix-entry slot is scale * (program coefficient).
    """
    block_sizes: list[int] = []
    entries: list[list[tuple[int, int, int, float]]] = [[] for _ in range(prog.num_vars)]
    for blk in prog.blocks:
        if blk.kind == "psd":
            block_sizes.append(blk.side)
            bno = len(block_sizes)
            k = blk.offset
            for i in range(blk.side):
                for j in range(i, blk.side):
                    scale = 1.0 if i == j else 1.0 / ROOT2
                    entries[k].append((bno, i + 1, j + 1, scale))
                    k += 1
        elif blk.kind == "nonneg":
            block_sizes.append(-blk.size)
            bno = len(block_sizes)
            for i in range(blk.size):
                entries[blk.offset + i].append((bno, i + 1, i + 1, 1.0))
        else:  # free: x = x_plus - x_minus on a diagonal block
            block_sizes.append(-2 * blk.size)
            bno = len(block_sizes)
            for i in range(blk.size):
                entries[blk.offset + i].append((bno, 2 * i + 1, 2 * i + 1, 1.0))
                entries[blk.offset + i].append((bno, 2 * i + 2, 2 * i + 2, -1.0))
    return block_sizes, entries


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _offdiag_file_value(a: float) -> float:
    """File-side value for an off-diagonal svec coefficient a.

    The file stores a / sqrt(2) and the parser multiplies back. Double
    rounding through sqrt(2) can land one ulp off, so nudge the written value
    to the neighbor whose product reproduces a exactly when one exists; the
    written value stays within one ulp of a / sqrt(2) either way.
    """
    v = a / ROOT2
    if v * ROOT2 == a:
        return v
    for candidate in (math.nextafter(v, math.inf), math.nextafter(v, -math.inf)):
        if candidate * ROOT2 == a:
            return candidate
    return v


def export_sdpa(prog: ConicProgram) -> str:
    """Render the program as SDPA sparse .dat-s text, byte-deterministic."""
    block_sizes, entries = _sdpa_layout(prog)
    lines = [str(len(prog.rows)), str(len(block_sizes)),
             " ".join(str(s) for s in block_sizes),
             " ".join(_fmt(v) for v in prog.rhs)]

    def emit(row_no: int, coeffs: dict[int, float]) -> None:
        cells: dict[tuple[int, int, int], float] = {}
        for var, a in coeffs.items():
            for bno, i, j, scale in entries[var]:
                if scale == 1.0:
                    v = a
                elif scale == -1.0:
                    v = -a
                else:
                    v = _offdiag_file_value(a)
                # distinct variables occupy distinct matrix slots by layout
                cells[(bno, i, j)] = v
        for (bno, i, j) in sorted(cells):
            v = cells[(bno, i, j)]
            if v != 0.0:
                lines.append(f"{row_no} {bno} {i} {j} {_fmt(v)}")

    emit(0, prog.objective.terms)
    for r, row in enumerate(prog.rows):
        emit(r + 1, row)
    return "\n".join(lines) + "\n"


class SdpaParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _data_lines(text: str):
    for ln, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in '"*':
            continue
        yield ln, stripped.replace(",", " ").replace("{", " ").replace(
            "}", " ").replace("(", " ").replace(")", " ")


def parse_sdpa(text: str) -> ConicProgram:
    """Parse .dat-s text back into a program.

    Diagonal blocks come back as nonnegative blocks (free splits are not
    reconstructed; exports of free-variable programs re-import as their split
    form). Coefficients are read exactly as written.
    """
    it = _data_lines(text)

    def next_line(what: str):
        try:
            return next(it)
        except StopIteration:
            raise SdpaParseError(0, f"unexpected end of file, expected {what}") from None

    ln, first = next_line("constraint count")
    try:
        m = int(first.split()[0])
    except (ValueError, IndexError):
        raise SdpaParseError(ln, "expected integer constraint count") from None
    ln, second = next_line("block count")
    try:
        nblocks = int(second.split()[0])
    except (ValueError, IndexError):
        raise SdpaParseError(ln, "expected integer block count") from None
    ln, third = next_line("block sizes")
    sizes = third.split()
    if len(sizes) != nblocks:
        raise SdpaParseError(ln, f"expected {nblocks} block sizes, got {len(sizes)}")
    try:
        sizes = [int(s) for s in sizes]
    except ValueError:
        raise SdpaParseError(ln, "block sizes must be integers") from None
    ln, fourth = next_line("objective row")
    rhs_strs = fourth.split()
    if len(rhs_strs) != m:
        raise SdpaParseError(ln, f"expected {m} objective entries, got {len(rhs_strs)}")
    try:
        rhs = [float(s) for s in rhs_strs]
    except ValueError:
        raise SdpaParseError(ln, "objective entries must be numbers") from None

    prog = ConicProgram()
    blocks = []
    for s in sizes:
        if s == 0:
            raise SdpaParseError(ln, "zero block size")
        blocks.append(prog.add_psd(s) if s > 0 else prog.add_nonneg(-s))

    obj = AffExpr()
    row_exprs = [AffExpr() for _ in range(m)]
    for ln, line in it:
        parts = line.split()
        if len(parts) != 5:
            raise SdpaParseError(ln, f"expected quintuple, got {len(parts)} fields")
        try:
            k, bno, i, j = (int(p) for p in parts[:4])
            v = float(parts[4])
        except ValueError:
            raise SdpaParseError(ln, "malformed quintuple") from None
        if not 0 <= k <= m:
            raise SdpaParseError(ln, f"constraint index {k} out of range")
        if not 1 <= bno <= nblocks:
            raise SdpaParseError(ln, f"block index {bno} out of range")
        blk = blocks[bno - 1]
        if blk.kind == "psd":
            if not (1 <= i <= j <= blk.side):
                raise SdpaParseError(ln, f"entry ({i},{j}) outside block of side {blk.side}")
            coeff = v if i == j else v * ROOT2
            expr = AffExpr({blk.offset + svec_index(blk.side, i - 1, j - 1): coeff})
        else:
            if i != j or not 1 <= i <= blk.size:
                raise SdpaParseError(ln, f"diagonal block entry ({i},{j}) invalid")
            expr = AffExpr({blk.offset + i - 1: v})
        if k == 0:
            obj = obj + expr
        else:
            row_exprs[k - 1] = row_exprs[k - 1] + expr

    prog.maximize(obj)
    for r in range(m):
        prog.add_equality(row_exprs[r], rhs[r])
    return prog


def _parse_brace_groups(text: str, start: int):
    """Nested brace structure starting at text[start] == '{' -> (tree, end)."""
    assert text[start] == "{"
    pos = start + 1
    items: list = []
    token = ""

    def flush():
        nonlocal token
        if token.strip():
            items.append(float(token))
        token = ""

    while pos < len(text):
        ch = text[pos]
        if ch == "{":
            sub, pos = _parse_brace_groups(text, pos)
            items.append(sub)
            continue
        if ch == "}":
            flush()
            return items, pos + 1
        if ch in ",\n\t\r ":
            flush()
        else:
            token += ch
        pos += 1
    raise ValueError("unbalanced braces")


def import_solution(prog: ConicProgram, text: str) -> Solution:
    """Read an SDPA-convention solution text and map it onto the program.

    The dual matrix section (yMat, SDPA's Y) carries our variable values;
    xVec carries the equality multipliers. Residuals are recomputed from the
    program, never trusted from the file.
    """
    marker = "yMat ="
    pos = text.find(marker)
    if pos < 0:
        line_no = text.count("\n") + 1
        raise SdpaParseError(line_no, "missing 'yMat =' section")
    brace = text.find("{", pos)
    if brace < 0:
        raise SdpaParseError(text.count("\n", 0, pos) + 1, "missing '{' after yMat")
    try:
        tree, _ = _parse_brace_groups(text, brace)
    except ValueError as e:
        raise SdpaParseError(text.count("\n", 0, brace) + 1, str(e)) from None

    block_sizes, entries = _sdpa_layout(prog)
    if len(tree) != len(block_sizes):
        raise SdpaParseError(text.count("\n", 0, brace) + 1,
                             f"expected {len(block_sizes)} blocks, got {len(tree)}")

    def block_matrix(node, size: int, bno: int) -> np.ndarray:
        where = f"yMat block {bno}"
        if size < 0:
            flat = list(node)
            if any(isinstance(q, list) for q in flat) or len(flat) != -size:
                raise SdpaParseError(0, f"{where}: expected {-size} diagonal entries")
            return np.diag(flat)
        rows = [q for q in node if isinstance(q, list)]
        if len(rows) == size and all(len(q) == size for q in rows):
            return np.array(rows, dtype=float)
        flat = [q for q in node if not isinstance(q, list)]
        if len(flat) == size * size:
            return np.array(flat, dtype=float).reshape(size, size)
        raise SdpaParseError(0, f"{where}: expected a {size}x{size} matrix")

    mats = [block_matrix(node, bs, bno + 1)
            for bno, (node, bs) in enumerate(zip(tree, block_sizes))]

    x = np.zeros(prog.num_vars)
    for var in range(prog.num_vars):
        total = 0.0
        for bno, i, j, scale in entries[var]:
            M = mats[bno - 1]
            val = (M[i - 1, j - 1] + M[j - 1, i - 1]) / 2.0 if i != j else M[i - 1, j - 1]
            # scale maps program coefficient to file coefficient; variable
            # values come back through the same isometry, inverted
            if scale == 1.0:
                total += val
            elif scale == -1.0:
                total -= val
            else:
                total += val * ROOT2
        x[var] = total

    y = None
    xvec_pos = text.find("xVec =")
    if xvec_pos >= 0:
        vb = text.find("{", xvec_pos)
        if vb >= 0:
            vals, _ = _parse_brace_groups(text, vb)
            flat = [q for q in vals if not isinstance(q, list)]
            if len(flat) == len(prog.rows):
                y = np.array(flat, dtype=float)

    A, b, c = prog.matrices()
    primal = float(np.abs(A @ x - b).max()) if len(b) else 0.0
    cone = prog.cone_violation(x)
    objective = float(c @ x) + prog.objective.const
    dual = 0.0
    if y is not None:
        slack = A.T @ y - c
        dual = float(np.abs(slack - prog.project_cone(slack)).max())
    status = "optimal" if primal <= 1e-6 and cone <= 1e-6 else "inaccurate"
    return Solution(status, x, objective, primal, dual, cone, iterations=0, y=y)
