"""Standard-form cone programming with a first-order operator-splitting solver.

Problems are stated as

    minimize    c'x
    subject to  A x + s = b,   s in K,

where K is an ordered product of zero, nonnegative, second-order, and PSD
cones.  PSD slacks are stored in scaled lower-triangular form (off-diagonal
entries multiplied by sqrt(2)) so that the vectorization is an isometry.

The solver runs ADMM on the homogeneous self-dual embedding: each iteration
is one fixed linear solve (cached Cholesky factorization) plus a projection
onto the cone product.  The embedding makes primal and dual infeasibility
detectable through the same iteration, and the solver returns certificates
(a Farkas dual for primal_infeasible, an improving ray for dual_infeasible).
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from . import linalg

CONE_KINDS = ("zero", "nonneg", "soc", "psd")


def cone_dim(block):
    """Slack dimension contributed by one cone block."""
    kind, size = block
    if kind not in CONE_KINDS:
        raise ValueError(f"unknown cone kind {kind!r}")
    if size < 1:
        raise ValueError("cone block size must be positive")
    if kind == "psd":
        return size * (size + 1) // 2
    return size


def cones_dim(cones):
    return sum(cone_dim(blk) for blk in cones)


def svec_indices(side):
    """Row/col indices and scaling for the lower-triangular vectorization."""
    rows, cols = np.tril_indices(side)
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, scale


def svec(M, side=None):
    """Scaled lower-triangular vectorization of a symmetric matrix."""
    M = np.asarray(M)
    side = M.shape[-1] if side is None else side
    rows, cols, scale = svec_indices(side)
    return M[..., rows, cols] * scale


def smat(v, side):
    """Inverse of svec: rebuild the symmetric matrix."""
    v = np.asarray(v)
    rows, cols, scale = svec_indices(side)
    vals = v / scale
    M = np.zeros(v.shape[:-1] + (side, side))
    M[..., rows, cols] = vals
    M[..., cols, rows] = vals
    return M


class ConicError(Exception):
    pass


@dataclass
class ConicProblem:
    """Cone program data: triplet/sparse A, dense b and c, ordered cone list."""

    A: scipy.sparse.csr_matrix
    b: np.ndarray
    c: np.ndarray
    cones: list

    def __init__(self, A, b, c, cones):
        b = np.ascontiguousarray(b, dtype=float).ravel()
        c = np.ascontiguousarray(c, dtype=float).ravel()
        if scipy.sparse.issparse(A):
            A = A.tocsr()
        else:
            A = scipy.sparse.csr_matrix(np.atleast_2d(np.asarray(A, dtype=float)))
        m, n = A.shape
        if b.shape[0] != m or c.shape[0] != n:
            raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}, c {c.shape}")
        total = cones_dim(cones)
        if total != m:
            raise ValueError(f"cone dims sum to {total} but A has {m} rows")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("b/c contain non-finite entries")
        if not np.all(np.isfinite(A.data)):
            raise ValueError("A contains non-finite entries")
        self.A = A
        self.b = b
        self.c = c
        self.cones = list(cones)

    @property
    def shape(self):
        return self.A.shape


@dataclass
class SolverSettings:
    tol: float = 1e-6
    infeas_tol: float = 1e-6
    max_iters: int = 100000
    check_interval: int = 25
    relax_alpha: float = 1.5
    equilibrate: bool = True
    equil_iters: int = 10
    verbose: bool = False


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray = None
    y: np.ndarray = None
    s: np.ndarray = None
    objective: float = np.nan
    residuals: dict = field(default_factory=dict)
    iterations: int = 0
    solve_time: float = 0.0
    certificate: np.ndarray = None


def project_cone(v, block, dual=False):
    """Project v onto one cone block (or its dual cone when dual=True).

    The dual differs from the primal cone only for zero blocks, whose dual is
    the free cone.
    """
    v = np.asarray(v, dtype=float)
    kind, size = block
    if v.shape[0] != cone_dim(block):
        raise ValueError("vector length does not match cone block")
    if kind == "zero":
        return v.copy() if dual else np.zeros_like(v)
    if kind == "nonneg":
        return np.maximum(v, 0.0)
    if kind == "soc":
        return _project_soc(v.copy())
    # psd: eigenvalue clipping on the symmetric reconstruction
    M = smat(v, size)[None, :, :]
    return svec(linalg.sym_eig_clip_batch(M)[0], size)


def _project_soc(v):
    t, z = v[0], v[1:]
    nz = np.linalg.norm(z)
    if nz <= t:
        return v
    if nz <= -t:
        return np.zeros_like(v)
    alpha = 0.5 * (1.0 + t / nz)
    v[0] = alpha * nz
    v[1:] *= alpha
    return v


class _ConeWork:
    """Precomputed index structure for fast projection of stacked slacks."""

    def __init__(self, cones):
        self.cones = cones
        self.m = cones_dim(cones)
        zero_idx = []
        nonneg_idx = []
        self.socs = []
        psd_by_side = {}
        offset = 0
        for kind, size in cones:
            d = cone_dim((kind, size))
            if kind == "zero":
                zero_idx.extend(range(offset, offset + d))
            elif kind == "nonneg":
                nonneg_idx.extend(range(offset, offset + d))
            elif kind == "soc":
                self.socs.append((offset, d))
            else:
                psd_by_side.setdefault(size, []).append(offset)
            offset += d
        self.zero_idx = np.asarray(zero_idx, dtype=int)
        self.nonneg_idx = np.asarray(nonneg_idx, dtype=int)
        self.psd_groups = []
        for side, starts in psd_by_side.items():
            d = side * (side + 1) // 2
            gather = np.concatenate(
                [np.arange(st, st + d) for st in starts]
            ).reshape(len(starts), d)
            rows, cols, scale = svec_indices(side)
            self.psd_groups.append((side, gather, rows, cols, scale))

    def project_dual(self, v):
        """Project onto K* in place (zero blocks become free = untouched)."""
        if self.nonneg_idx.size:
            v[self.nonneg_idx] = np.maximum(v[self.nonneg_idx], 0.0)
        for off, d in self.socs:
            v[off : off + d] = _project_soc(v[off : off + d])
        for side, gather, rows, cols, scale in self.psd_groups:
            blocks = v[gather] / scale
            mats = np.zeros((gather.shape[0], side, side))
            mats[:, rows, cols] = blocks
            mats[:, cols, rows] = blocks
            mats = linalg.sym_eig_clip_batch(mats)
            v[gather] = mats[:, rows, cols] * scale
        return v

    def project_primal(self, v):
        out = v.copy()
        self.project_dual(out)
        if self.zero_idx.size:
            out[self.zero_idx] = 0.0
        return out

    def row_groups(self):
        """Index groups whose equilibration factors must stay uniform."""
        groups = []
        offset = 0
        for kind, size in self.cones:
            d = cone_dim((kind, size))
            if kind in ("zero", "nonneg"):
                groups.extend([np.array([i]) for i in range(offset, offset + d)])
            else:
                groups.append(np.arange(offset, offset + d))
            offset += d
        return groups


def _equilibrate(A, b, c, cone_work, iters):
    """Ruiz equilibration with cone-block-uniform row scalings.

    Returns scaled data plus the diagonal factors needed to map candidate
    points back to the original problem.
    """
    m, n = A.shape
    D = np.ones(m)
    E = np.ones(n)
    As = A.copy()
    groups = cone_work.row_groups()
    for _ in range(iters):
        rn = np.max(np.abs(As), axis=1)
        for g in groups:
            rn[g] = np.max(rn[g]) if g.size else 1.0
        rn[rn == 0] = 1.0
        cn = np.max(np.abs(As), axis=0)
        cn[cn == 0] = 1.0
        dr = 1.0 / np.sqrt(rn)
        dc = 1.0 / np.sqrt(cn)
        As = As * dr[:, None]
        As = As * dc[None, :]
        D *= dr
        E *= dc
    bs = D * b
    cs = E * c
    beta = 1.0 / max(np.linalg.norm(bs), 1e-10)
    rho = 1.0 / max(np.linalg.norm(cs), 1e-10)
    return As, bs * beta, cs * rho, D, E, beta, rho


def solve(problem, settings=None):
    """Solve a ConicProblem; returns a ConicSolution.

    Statuses: "optimal", "primal_infeasible", "dual_infeasible" (unbounded),
    or "max_iters" when no certificate was reached within the iteration cap.
    Residuals are always measured against the original (unscaled) data.
    """
    settings = settings or SolverSettings()
    t0 = time.perf_counter()
    A0 = problem.A.toarray()
    b0, c0 = problem.b, problem.c
    m, n = A0.shape
    work = _ConeWork(problem.cones)

    if settings.equilibrate:
        As, bs, cs, D, E, beta, rho = _equilibrate(
            A0, b0, c0, work, settings.equil_iters
        )
    else:
        As, bs, cs = A0.copy(), b0.copy(), c0.copy()
        D, E, beta, rho = np.ones(m), np.ones(n), 1.0, 1.0

    # Cached factorization for the fixed HSDE linear system.
    AtA = As.T @ As
    AtA[np.diag_indices(n)] += 1.0
    cho = scipy.linalg.cho_factor(AtA, lower=True, check_finite=False)

    def m_solve(rx, ry):
        # [[I, A'], [-A, I]] z = (rx, ry)
        zx = scipy.linalg.cho_solve(cho, rx - As.T @ ry, check_finite=False)
        return zx, ry + As @ zx

    h_x, h_y = cs, bs
    px, py = m_solve(h_x, h_y)
    denom = 1.0 + h_x @ px + h_y @ py

    u = np.zeros(n + m + 1)
    v = np.zeros(n + m + 1)
    u[-1] = 1.0
    v[-1] = 1.0
    alpha = settings.relax_alpha
    nb = 1.0 + np.linalg.norm(b0)
    nc = 1.0 + np.linalg.norm(c0)

    best = None
    status = "max_iters"
    iters_done = settings.max_iters
    for it in range(1, settings.max_iters + 1):
        w = u + v
        rx, ry, wt = w[:n], w[n : n + m], w[-1]
        gx, gy = m_solve(rx - wt * h_x, ry - wt * h_y)
        coef = (h_x @ gx + h_y @ gy) / denom
        zx = gx - px * coef
        zy = gy - py * coef
        ut_tau = wt + h_x @ zx + h_y @ zy

        # over-relaxed fixed-point step
        tx = alpha * zx + (1 - alpha) * u[:n]
        ty = alpha * zy + (1 - alpha) * u[n : n + m]
        tt = alpha * ut_tau + (1 - alpha) * u[-1]

        u_new = np.empty_like(u)
        u_new[:n] = tx - v[:n]
        yv = ty - v[n : n + m]
        work.project_dual(yv)
        u_new[n : n + m] = yv
        u_new[-1] = max(tt - v[-1], 0.0)

        v[:n] += u_new[:n] - tx
        v[n : n + m] += u_new[n : n + m] - ty
        v[-1] += u_new[-1] - tt
        u = u_new

        if it % settings.check_interval != 0 and it != settings.max_iters:
            continue

        tau = u[-1]
        if tau > 1e-12:
            x = E * u[:n] / (beta * tau)
            y = D * u[n : n + m] / (rho * tau)
            s = (v[n : n + m] / D) / (beta * tau)
            pres = np.linalg.norm(A0 @ x + s - b0) / nb
            dres = np.linalg.norm(A0.T @ y + c0) / nc
            ctx = c0 @ x
            bty = b0 @ y
            gap = abs(ctx + bty) / (1.0 + abs(ctx) + abs(bty))
            best = (x, y, s, pres, dres, gap, ctx)
            if pres <= settings.tol and dres <= settings.tol and gap <= settings.tol:
                status = "optimal"
                iters_done = it
                break

        # certificate checks (independent of tau)
        y_ray = D * u[n : n + m]
        bty_ray = b0 @ y_ray
        if bty_ray < -1e-14:
            cert = y_ray / (-bty_ray)
            res = np.linalg.norm(A0.T @ cert)
            if res <= settings.infeas_tol:
                status = "primal_infeasible"
                iters_done = it
                sol = ConicSolution(
                    status=status,
                    y=cert,
                    residuals={"certificate": float(res)},
                    iterations=it,
                    solve_time=time.perf_counter() - t0,
                    certificate=cert,
                )
                return sol
        x_ray = E * u[:n]
        ctx_ray = c0 @ x_ray
        if ctx_ray < -1e-14:
            certx = x_ray / (-ctx_ray)
            sray = work.project_primal(-A0 @ certx)
            res = np.linalg.norm(A0 @ certx + sray)
            if res <= settings.infeas_tol:
                status = "dual_infeasible"
                iters_done = it
                sol = ConicSolution(
                    status=status,
                    x=certx,
                    s=sray,
                    residuals={"certificate": float(res)},
                    iterations=it,
                    solve_time=time.perf_counter() - t0,
                    certificate=certx,
                )
                return sol

    elapsed = time.perf_counter() - t0
    if best is None:
        return ConicSolution(
            status="max_iters", iterations=iters_done, solve_time=elapsed
        )
    x, y, s, pres, dres, gap, ctx = best
    return ConicSolution(
        status=status,
        x=x,
        y=y,
        s=s,
        objective=float(ctx),
        residuals={"primal": float(pres), "dual": float(dres), "gap": float(gap)},
        iterations=iters_done,
        solve_time=elapsed,
    )


def dump_problem(problem, path):
    """Write a plain-text dump: 'n m' header, A triplets, b, c, cone list."""
    A = problem.A.tocoo()
    m, n = problem.shape
    with open(path, "w") as f:
        f.write(f"{n} {m}\n")
        f.write(f"A {A.nnz}\n")
        for i, j, val in zip(A.row, A.col, A.data):
            f.write(f"{i} {j} {float(val)!r}\n")
        f.write("b\n")
        for val in problem.b:
            f.write(f"{float(val)!r}\n")
        f.write("c\n")
        for val in problem.c:
            f.write(f"{float(val)!r}\n")
        f.write("cones\n")
        for kind, size in problem.cones:
            f.write(f"{kind} {size}\n")


def load_problem(path):
    """Read back a dump_problem file."""
    with open(path) as f:
        lines = [ln.strip() for ln in f]
    pos = 0
    n, m = (int(t) for t in lines[pos].split())
    pos += 1
    tag, nnz = lines[pos].split()
    if tag != "A":
        raise ConicError("malformed dump: expected A section")
    nnz = int(nnz)
    pos += 1
    rows = np.empty(nnz, dtype=int)
    cols = np.empty(nnz, dtype=int)
    vals = np.empty(nnz)
    for k in range(nnz):
        i, j, val = lines[pos + k].split()
        rows[k], cols[k], vals[k] = int(i), int(j), float(val)
    pos += nnz
    if lines[pos] != "b":
        raise ConicError("malformed dump: expected b section")
    pos += 1
    b = np.array([float(t) for t in lines[pos : pos + m]])
    pos += m
    if lines[pos] != "c":
        raise ConicError("malformed dump: expected c section")
    pos += 1
    c = np.array([float(t) for t in lines[pos : pos + n]])
    pos += n
    if lines[pos] != "cones":
        raise ConicError("malformed dump: expected cone section")
    pos += 1
    cones = []
    while pos < len(lines) and lines[pos]:
        kind, size = lines[pos].split()
        cones.append((kind, int(size)))
        pos += 1
    A = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(m, n)).tocsr()
    return ConicProblem(A, b, c, cones)
