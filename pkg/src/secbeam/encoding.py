"""Real parametrization of Hermitian decision variables and row builders.

A Hermitian n x n variable is carried as n^2 real parameters: the n diagonal
entries first, then (Re, Im) of each strictly-upper entry in row-major order.
Scalar constraints (quadratic forms, traces) and matrix constraints (PSD
blocks, LMIs after complex-to-real embedding) are all linear in these
parameters; this module produces those coefficient rows/columns.
"""

import numpy as np

from . import conic, linalg


def herm_param_count(n):
    return n * n


def infeasible_problem():
    """Certified-infeasible stub: 0 * x = 1 in the zero cone.

    Stands in for design points that are infeasible by exact structure;
    the solver emits the dual certificate immediately, so grid searches
    record an honest primal_infeasible status instead of stalling on a
    program with empty interior.
    """
    return conic.ConicProblem(
        np.zeros((1, 1)), np.array([1.0]), np.zeros(1), [("zero", 1)])


def herm_basis(n):
    """Tensor (n^2, n, n) of unit Hermitian basis matrices (cached)."""
    cached = _BASIS_CACHE.get(n)
    if cached is not None:
        return cached
    E = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        E[i, i, i] = 1.0
    idx = n
    for i in range(n):
        for j in range(i + 1, n):
            E[idx, i, j] = 1.0
            E[idx, j, i] = 1.0
            E[idx + 1, i, j] = 1j
            E[idx + 1, j, i] = -1j
            idx += 2
    _BASIS_CACHE[n] = E
    return E


_BASIS_CACHE = {}


def params_to_herm(p, n):
    """Rebuild the Hermitian matrix from its real parameter vector."""
    p = np.asarray(p, dtype=float)
    H = np.zeros((n, n), dtype=complex)
    H[np.diag_indices(n)] = p[:n]
    idx = n
    for i in range(n):
        for j in range(i + 1, n):
            H[i, j] = p[idx] + 1j * p[idx + 1]
            H[j, i] = p[idx] - 1j * p[idx + 1]
            idx += 2
    return H


def herm_to_params(H):
    H = np.asarray(H)
    n = H.shape[0]
    p = np.empty(n * n)
    p[:n] = np.real(np.diag(H))
    idx = n
    for i in range(n):
        for j in range(i + 1, n):
            p[idx] = H[i, j].real
            p[idx + 1] = H[i, j].imag
            idx += 2
    return p


def quad_form_row(a, b=None):
    """Complex coefficients of a^H T b as a function of T's parameters.

    With b omitted this is the self form a^H T a, whose coefficients are real.
    """
    a = np.asarray(a, dtype=complex)
    b = a if b is None else np.asarray(b, dtype=complex)
    n = len(a)
    O = np.outer(a.conj(), b)
    row = np.empty(n * n, dtype=complex)
    row[:n] = np.diag(O)
    idx = n
    for i in range(n):
        for j in range(i + 1, n):
            row[idx] = O[i, j] + O[j, i]
            row[idx + 1] = 1j * (O[i, j] - O[j, i])
            idx += 2
    return row


def quad_form_rows(A):
    """Stacked self-quadratic-form rows for each column a_m of A (real).

    Returns (M, n^2) with row m the coefficients of a_m^H T a_m.
    """
    A = np.asarray(A, dtype=complex)
    n, m = A.shape
    O = np.einsum("im,jm->mij", A.conj(), A)
    rows = np.empty((m, n * n))
    rows[:, :n] = np.real(O[:, np.arange(n), np.arange(n)])
    iu, ju = _upper_indices(n)
    rows[:, n::2] = 2.0 * np.real(O[:, iu, ju])
    rows[:, n + 1 :: 2] = -2.0 * np.imag(O[:, iu, ju])
    return rows


def _upper_indices(n):
    iu, ju = np.triu_indices(n, 1)
    order = np.lexsort((ju, iu))  # row-major to match the parameter layout
    return iu[order], ju[order]


def embed_svec(mats):
    """svec of the real embedding for a stack of complex Hermitian matrices."""
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim == 2:
        mats = mats[None]
    k, s, _ = mats.shape
    out = np.empty((k, 2 * s, 2 * s))
    out[:, :s, :s] = mats.real
    out[:, :s, s:] = -mats.imag
    out[:, s:, :s] = mats.imag
    out[:, s:, s:] = mats.real
    return conic.svec(out, 2 * s)


def herm_psd_columns(n):
    """Columns (svec_dim x n^2) mapping parameters to svec(embed(T)).

    Used for the PSD cone membership of a Hermitian variable itself; cached.
    """
    cached = _PSD_COL_CACHE.get(n)
    if cached is None:
        cached = embed_svec(herm_basis(n)).T
        _PSD_COL_CACHE[n] = cached
    return cached


_PSD_COL_CACHE = {}


def lmi_columns_response(h_hat):
    """S-procedure LMI response to the V = W - phi*S part.

    For each Hermitian basis direction V of size n, the LMI block contribution
    is [[-V, -V h], [-h^H V, -h^H V h]] of side n+1.  Returns the stacked
    svec(embed(.)) columns with shape (svec_dim, n^2).
    """
    h = np.asarray(h_hat, dtype=complex)
    n = len(h)
    E = herm_basis(n)
    Eh = E @ h
    hEh = np.einsum("i,kij,j->k", h.conj(), E, h)
    blocks = np.zeros((n * n, n + 1, n + 1), dtype=complex)
    blocks[:, :n, :n] = -E
    blocks[:, :n, n] = -Eh
    blocks[:, n, :n] = -Eh.conj()
    blocks[:, n, n] = -hEh
    return embed_svec(blocks).T


def lmi_lambda_column(n, eps):
    """LMI column for the multiplier: diag(I_n, -eps^2), embedded."""
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[np.diag_indices(n)] = 1.0
    M[n, n] = -(eps**2)
    return embed_svec(M)[0]


def lmi_constant(n, value):
    """Constant LMI part: value in the lower-right corner, embedded svec."""
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[n, n] = value
    return embed_svec(M)[0]


def vector_response(R, h):
    """Real-stacked columns of the map V -> R V h.

    Returns (2n, n^2): per Hermitian basis direction of V, the vector R E h
    stacked as [Re; Im].
    """
    R = np.asarray(R, dtype=complex)
    h = np.asarray(h, dtype=complex)
    n = R.shape[0]
    vecs = np.einsum("ab,kbc,c->ka", R, herm_basis(n), h)
    return np.vstack([vecs.T.real, vecs.T.imag])


def congruence_response(R):
    """Columns of the map V -> R V R^H in several useful shapes.

    Returns (mats, vec_real, trace_row) where, per Hermitian basis direction
    of V: mats is the (n^2, n, n) complex tensor of R E R^H, vec_real the
    (2 n^2, n^2) real stacking [Re vec; Im vec], and trace_row the real trace
    coefficients.  R is Hermitian in our uses (a covariance square root).
    """
    R = np.asarray(R, dtype=complex)
    n = R.shape[0]
    E = herm_basis(n)
    mats = np.einsum("ab,kbc,dc->kad", R, E, R.conj())
    flat = mats.reshape(n * n, n * n).T
    vec_real = np.vstack([flat.real, flat.imag])
    trace_row = np.real(np.trace(mats, axis1=1, axis2=2))
    return mats, vec_real, trace_row


def objective_rows(config, spec, basis=None, fixed=None):
    """Matching-residual rows shared by every design program.

    The sensing objective is ||r||^2 for the stacked residual
    r = eta * eta_col - rows @ params - const, with the angle rows weighted
    by sqrt(1/M) and the target cross-correlation rows (if omega_c > 0) by
    sqrt(2 omega_c / (K^2 - K)), split into real and imaginary parts.

    With `basis` Q (n x r, orthonormal columns) the variable is the reduced
    Hermitian X and the covariance contribution is Q X Q^H, so the rows act
    on r^2 parameters.  `fixed` adds a constant Hermitian part to the
    covariance; its effect lands in `const`.  Returns (rows, eta_col, const).
    """
    from . import model

    ang = spec.sample_angles
    n = config.n
    A = model.steering(ang, n, config.spacing_ratio)
    scale = 1.0 / np.sqrt(spec.m)
    W0 = np.zeros((n, n)) if fixed is None else np.asarray(fixed, dtype=complex)
    A_var = A if basis is None else np.asarray(basis, dtype=complex).conj().T @ A
    bp = quad_form_rows(A_var) * scale
    eta_col = model.desired_beampattern(ang, config.target_angles, spec.delta_theta) * scale
    const = scale * np.real(np.einsum("im,ij,jm->m", A.conj(), W0, A))
    if spec.omega_c > 0:
        k = config.k_targets
        if k < 2:
            raise ValueError("cross-correlation penalty needs at least two targets")
        wc = np.sqrt(2.0 * spec.omega_c / (k * k - k))
        At = model.steering(config.target_angles, n, config.spacing_ratio)
        At_var = At if basis is None else np.asarray(basis, dtype=complex).conj().T @ At
        cross, cross_const = [], []
        for p in range(k):
            for q in range(p + 1, k):
                row = quad_form_row(At_var[:, p], At_var[:, q])
                fix = complex(At[:, p].conj() @ W0 @ At[:, q])
                cross.append(wc * row.real)
                cross.append(wc * row.imag)
                cross_const.extend([wc * fix.real, wc * fix.imag])
        rows = np.vstack([bp, np.array(cross)])
        eta_col = np.concatenate([eta_col, np.zeros(len(cross))])
        const = np.concatenate([const, cross_const])
    else:
        rows = bp
    return rows, eta_col, const


class VarMap:
    """Ordered variable layout: name -> (start, size) slices into x."""

    def __init__(self, blocks):
        self.slices = {}
        off = 0
        for name, size in blocks:
            self.slices[name] = slice(off, off + size)
            off += size
        self.n = off

    def __getitem__(self, name):
        return self.slices[name]

    def place(self, row, name, values):
        row[self.slices[name]] = values
        return row


class RowBlocks:
    """Accumulates (A, b, cone) row blocks in canonical cone order."""

    def __init__(self, n_vars):
        self.n = n_vars
        self.sections = {"zero": [], "nonneg": [], "soc": [], "psd": []}

    def add(self, kind, A_rows, b_rows, size=None):
        A_rows = np.atleast_2d(A_rows)
        b_rows = np.atleast_1d(b_rows)
        if size is None:
            size = A_rows.shape[0]
        self.sections[kind].append((A_rows, b_rows, size))

    def build(self, c):
        A_parts, b_parts, cones = [], [], []
        for kind in ("zero", "nonneg", "soc", "psd"):
            blocks = self.sections[kind]
            if not blocks:
                continue
            if kind in ("zero", "nonneg"):
                rows = np.vstack([blk[0] for blk in blocks])
                A_parts.append(rows)
                b_parts.append(np.concatenate([blk[1] for blk in blocks]))
                cones.append((kind, rows.shape[0]))
            else:
                for A_rows, b_rows, size in blocks:
                    A_parts.append(A_rows)
                    b_parts.append(b_rows)
                    cones.append((kind, size))
        A = np.vstack(A_parts)
        b = np.concatenate(b_parts)
        return conic.ConicProblem(A, b, c, cones)
