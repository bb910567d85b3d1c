"""Separate information / sensing design benchmark.

Stage 1 finds the cheapest secure information beam on its own: minimize the
transmit power of W subject to the CU SINR target and the same per-gamma
secrecy constraints as the joint pipelines, with the sensing part fixed to
zero, searching gamma for the minimum-power point.  Stage 2 spends the
per-antenna power left over on a sensing covariance confined to the
orthogonal complement of the CU channel.  The split keeps stage 1's rate
guarantee intact: the CU sees no added interference, and every eavesdropper
only gains interference.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import conic, encoding, linalg, model, outage, search, worstcase

PHI_ZF_TOL = worstcase.PHI_ZF_TOL


def nullspace_projector(g):
    """Hermitian projector onto the orthogonal complement of the channel."""
    g = np.asarray(g, dtype=complex)
    nrm = float(np.linalg.norm(g))
    if not np.isfinite(nrm) or nrm == 0.0:
        raise ValueError("channel must be finite and nonzero")
    return np.eye(len(g)) - np.outer(g, g.conj()) / nrm**2


def _complement_basis(g):
    """Orthonormal basis of the projector's range, (n, n-1)."""
    g = np.asarray(g, dtype=complex)
    basis = scipy.linalg.null_space(g.conj()[None, :])
    if basis.shape != (len(g), len(g) - 1):
        raise ValueError("channel must be finite and nonzero")
    return basis


class _PowerMinBounded:
    """Per-gamma power minimization rows for the bounded error model.

    Variables stack as [W params, lam_1..lam_K] and the objective is Tr(W).
    The secrecy side reuses the joint pipeline's S-procedure LMI with the
    sensing part absent (V = W).
    """

    def __init__(self, instance):
        cfg = instance.config
        self.instance = instance
        n = cfg.n
        ke = cfg.k_eve
        nw = encoding.herm_param_count(n)

        blocks = [("w", nw)]
        if ke:
            blocks.append(("lam", ke))
        self.vars = encoding.VarMap(blocks)
        nv = self.vars.n

        cg = float(np.linalg.norm(cfg.g))
        self.sigma0n = cfg.sigma0_sq / cg**2
        self.qf_g = np.real(encoding.quad_form_row(cfg.g / cg))
        if ke:
            ch = np.linalg.norm(cfg.h_hat, axis=1)
            h_unit = cfg.h_hat / ch[:, None]
            self.sigman = cfg.sigma_eve_sq / ch**2
            epsn = instance.epsilons / ch
            self.lmi_resp = [encoding.lmi_columns_response(h_unit[k]) for k in range(ke)]
            self.lmi_lam = [encoding.lmi_lambda_column(n, epsn[k]) for k in range(ke)]
            self.lmi_const = encoding.lmi_constant(n, 1.0)
            lam_rows = np.zeros((ke, nv))
            lam_rows[np.arange(ke), self.vars["lam"].start + np.arange(ke)] = -1.0
            self.lam_rows = lam_rows

        psd_cols = encoding.herm_psd_columns(n)
        self.A_psd_w = np.zeros((psd_cols.shape[0], nv))
        self.A_psd_w[:, self.vars["w"]] = -psd_cols

        self.c = np.zeros(nv)
        self.c[self.vars["w"].start + np.arange(n)] = 1.0

    def problem(self, gamma):
        cfg = self.instance.config
        n, ke, nv = cfg.n, cfg.k_eve, self.vars.n
        ph = model.phi(gamma, self.instance.r0)

        rb = encoding.RowBlocks(nv)
        cu = np.zeros(nv)
        cu[self.vars["w"]] = -self.qf_g
        rb.add("nonneg", cu, np.array([-gamma * self.sigma0n]))
        if ke:
            rb.add("nonneg", self.lam_rows, np.zeros(ke))
        rb.add("psd", self.A_psd_w, np.zeros(self.A_psd_w.shape[0]), size=2 * n)
        for k in range(ke):
            resp = self.lmi_resp[k]
            A_lmi = np.zeros((resp.shape[0], nv))
            A_lmi[:, self.vars["w"]] = -resp
            A_lmi[:, self.vars["lam"].start + k] = -self.lmi_lam[k]
            rb.add("psd", A_lmi, (ph * self.sigman[k]) * self.lmi_const, size=2 * (n + 1))
        return rb.build(self.c)

    def extract(self, x):
        return encoding.params_to_herm(x[self.vars["w"]], self.instance.config.n)


class _PowerMinGaussian:
    """Per-gamma power minimization rows for the Gaussian error model.

    Same chance-constraint restriction as the joint pipeline (trace row, data
    norm cone, shifted PSD block per eavesdropper) with the sensing part
    absent, so the quadratic data reduce to M = -W.
    """

    def __init__(self, instance):
        cfg = instance.config
        self.instance = instance
        n = cfg.n
        ke = cfg.k_eve
        nw = encoding.herm_param_count(n)

        blocks = [("w", nw)]
        if ke:
            blocks.extend([("a", ke), ("b", ke)])
        self.vars = encoding.VarMap(blocks)
        nv = self.vars.n

        cg = float(np.linalg.norm(cfg.g))
        self.sigma0n = cfg.sigma0_sq / cg**2
        self.qf_g = np.real(encoding.quad_form_row(cfg.g / cg))
        if ke:
            ch = np.linalg.norm(cfg.h_hat, axis=1)
            h_unit = cfg.h_hat / ch[:, None]
            self.sigman = cfg.sigma_eve_sq / ch**2
            cov_n = instance.cov / (ch**2)[:, None, None]
            self.trace_qf = []
            self.soc_resp = []
            self.psd_resp = []
            for k in range(ke):
                R = linalg.matrix_sqrt_psd(cov_n[k])
                mats, vec_real, trace_row = encoding.congruence_response(R)
                qrows = encoding.vector_response(R, h_unit[k])
                qf_h = np.real(encoding.quad_form_row(h_unit[k]))
                self.trace_qf.append(trace_row + qf_h)
                self.soc_resp.append(np.vstack([np.sqrt(2.0) * qrows, vec_real]))
                self.psd_resp.append(encoding.embed_svec(mats).T)
            self.eye_col = encoding.embed_svec(np.eye(n, dtype=complex))[0]
            b_rows = np.zeros((ke, nv))
            b_rows[np.arange(ke), self.vars["b"].start + np.arange(ke)] = -1.0
            self.b_nonneg_rows = b_rows

        psd_cols = encoding.herm_psd_columns(n)
        self.A_psd_w = np.zeros((psd_cols.shape[0], nv))
        self.A_psd_w[:, self.vars["w"]] = -psd_cols

        self.c = np.zeros(nv)
        self.c[self.vars["w"].start + np.arange(n)] = 1.0

    def problem(self, gamma):
        inst = self.instance
        cfg = inst.config
        n, ke, nv = cfg.n, cfg.k_eve, self.vars.n
        ph = model.phi(gamma, inst.r0)

        rb = encoding.RowBlocks(nv)
        cu = np.zeros(nv)
        cu[self.vars["w"]] = -self.qf_g
        rb.add("nonneg", cu, np.array([-gamma * self.sigma0n]))
        if ke:
            rb_ = inst.rho_bar
            sq2ln = np.sqrt(-2.0 * np.log(rb_))
            lnrb = np.log(rb_)
            trace_rows = np.zeros((ke, nv))
            for k in range(ke):
                trace_rows[k, self.vars["w"]] = self.trace_qf[k]
                trace_rows[k, self.vars["a"].start + k] = sq2ln
                trace_rows[k, self.vars["b"].start + k] = -lnrb
            rb.add("nonneg", trace_rows, ph * self.sigman)
            rb.add("nonneg", self.b_nonneg_rows, np.zeros(ke))
            for k in range(ke):
                resp = self.soc_resp[k]
                A_bti = np.zeros((1 + resp.shape[0], nv))
                A_bti[0, self.vars["a"].start + k] = -1.0
                A_bti[1:, self.vars["w"]] = resp
                rb.add("soc", A_bti, np.zeros(A_bti.shape[0]))
        rb.add("psd", self.A_psd_w, np.zeros(self.A_psd_w.shape[0]), size=2 * n)
        if ke:
            for k in range(ke):
                resp = self.psd_resp[k]
                A_shift = np.zeros((resp.shape[0], nv))
                A_shift[:, self.vars["w"]] = resp
                A_shift[:, self.vars["b"].start + k] = -self.eye_col
                rb.add("psd", A_shift, np.zeros(resp.shape[0]), size=2 * n)
        return rb.build(self.c)

    def extract(self, x):
        return encoding.params_to_herm(x[self.vars["w"]], self.instance.config.n)


def _powermin_encoding(instance):
    if isinstance(instance, outage.OutageInstance):
        return _PowerMinGaussian(instance)
    return _PowerMinBounded(instance)


def powermin_settings(points=100, workers=1):
    """Search settings tuned for the power objective.

    The scan only has to rank gammas, and grid power values separate at the
    1e-3 level, so a loose grid tolerance is safe and much faster (the
    zero-leakage constraints make tight first-order solves crawl).  The
    final solve gets a tight tolerance and a large iteration budget.
    """
    return search.SearchSettings(
        points=points,
        workers=workers,
        grid_solver=conic.SolverSettings(tol=1e-4, max_iters=25000),
        final_solver=conic.SolverSettings(tol=1e-6, max_iters=400000),
    )


def _zf_powermin(config, gamma):
    """Closed-form minimum-power beam when zero leakage is forced.

    With exact eavesdropper CSI and phi = 0 the constraint set is W >= 0,
    W h_k = 0, g^H W g >= gamma sigma0^2, whose minimum-trace point is the
    rank-one beam along the CU channel projected off the eavesdropper span.
    Returns None when that projection vanishes (no secure direction).
    """
    g = config.g
    if config.k_eve:
        span = scipy.linalg.orth(config.h_hat.T)
        pg = g - span @ (span.conj().T @ g)
    else:
        pg = np.array(g, dtype=complex)
    f = float(np.real(np.vdot(pg, pg)))
    if f <= 1e-12 * float(np.real(np.vdot(g, g))):
        return None
    w = pg * np.sqrt(gamma * config.sigma0_sq) / f
    return np.outer(w, w.conj())


@dataclass(frozen=True)
class PowerMinResult:
    """Stage-1 output: the rank-one information covariance and its cost."""

    W_bar: np.ndarray
    gamma: float
    power: float
    status: str
    info: dict


def solve_powermin(instance, settings=None):
    """Minimum-power secure information beam with no sensing part.

    Scans the CU SINR over its feasible interval at a loose tolerance (the
    scan only ranks gammas), then finishes the cheapest point tightly and
    restores rank one by projecting onto the CU channel.  The projection
    preserves the CU row, cannot raise any eavesdropper quadratic form, and
    only sheds power, so feasibility and the power objective both survive.
    The shed remainder is left for the sensing stage's budget.

    When exact CSI and phi(gamma*) = 0 force zero leakage, the tight solve
    is replaced by the closed-form zero-forcing beam: that point has no
    strictly feasible interior, where first-order iterations stall.
    """
    settings = settings or powermin_settings()
    enc = _powermin_encoding(instance)
    cfg = instance.config
    n = cfg.n
    lo, hi = model.gamma_interval(instance.r0, cfg)
    best_gamma, table = search.grid_minimize(enc.problem, lo, hi, settings)
    info = {"gamma_interval": (lo, hi), "gamma_grid": table}
    if best_gamma is None:
        statuses = {row[2] for row in table}
        status = "infeasible" if statuses == {"primal_infeasible"} else "max_iters"
        return PowerMinResult(W_bar=np.zeros((n, n), dtype=complex), gamma=np.nan,
                              power=np.inf, status=status, info=info)

    bounded = not isinstance(instance, outage.OutageInstance)
    if bounded and np.all(instance.epsilons == 0.0) \
            and model.phi(best_gamma, instance.r0) <= PHI_ZF_TOL:
        W_star = _zf_powermin(cfg, best_gamma)
        if W_star is None:
            info["reason"] = "CU channel lies in the eavesdropper span"
            return PowerMinResult(W_bar=np.zeros((n, n), dtype=complex), gamma=np.nan,
                                  power=np.inf, status="infeasible", info=info)
        info["finish"] = "zero-forcing closed form"
    else:
        sol = conic.solve(enc.problem(best_gamma), settings.final_solver)
        if sol.status != "optimal":
            info["final_status"] = sol.status
            return PowerMinResult(W_bar=np.zeros((n, n), dtype=complex), gamma=np.nan,
                                  power=np.inf, status=sol.status, info=info)
        W_t = enc.extract(sol.x)
        W_c = model._clip_psd(W_t, worstcase.RESIDUAL_PSD_TOL, "W")
        if best_gamma == 0.0 or np.real(np.vdot(cfg.g, W_c @ cfg.g)) <= worstcase.DEGENERATE_POWER:
            W_star = np.zeros((n, n), dtype=complex)
        else:
            W_star, _ = model.rank_one_construct(W_c, np.zeros((n, n), dtype=complex), cfg.g)
        info["solver"] = {
            "iterations": sol.iterations,
            "solve_time": sol.solve_time,
            "residuals": sol.residuals,
        }
    power = float(np.real(np.trace(W_star)))
    if power > n * cfg.q * (1.0 + 1e-9):
        info["reason"] = "information beam needs more than the total power budget"
        return PowerMinResult(W_bar=W_star, gamma=float(best_gamma), power=power,
                              status="infeasible", info=info)
    return PowerMinResult(W_bar=W_star, gamma=float(best_gamma), power=power,
                          status="optimal", info=info)


def solve_sep_sensing(W_bar, config, spec, solver=None):
    """Null-space sensing fill around a fixed information covariance.

    Solves for S = B Sbar B^H with B an orthonormal basis of the CU
    channel's orthogonal complement, subject to diag(W_bar + S) = Q and
    Sbar >= 0, minimizing the matching error.  Returns (S, eta).  An antenna
    over-spent by stage 1 (negative residual) raises; a saturated antenna
    (zero residual) is removed from the sensing space up front, since the
    equivalent equality constraint leaves the cone program no interior.
    """
    solver = solver or conic.SolverSettings(tol=1e-7)
    cfg = config
    n = cfg.n
    W_bar = np.asarray(W_bar, dtype=complex)
    resid = cfg.q - np.real(np.diag(W_bar))
    if np.min(resid) < -1e-9 * cfg.q:
        raise ValueError("information beam exceeds the per-antenna power budget")
    resid = np.maximum(resid, 0.0)

    basis = _complement_basis(cfg.g)
    active = resid > 1e-12 * cfg.q
    if not np.all(active):
        # zero sensing power on antenna i forces Sbar (B^H e_i) = 0
        pinned = basis.conj().T @ np.eye(n)[:, ~active]
        keep = scipy.linalg.null_space(pinned.conj().T)
        basis = basis @ keep
    r = basis.shape[1]
    if r == 0:
        S = np.zeros((n, n), dtype=complex)
        _, eta_col, const = encoding.objective_rows(cfg, spec, fixed=W_bar)
        eta = float(eta_col @ const / (eta_col @ eta_col))
        return S, eta
    nr = encoding.herm_param_count(r)
    vars_ = encoding.VarMap([("sbar", nr), ("eta", 1), ("t", 1)])
    nv = vars_.n

    # diag(B Sbar B^H)_i is the self form of the i-th row of B
    diag_rows = encoding.quad_form_rows(basis.conj().T)
    A_diag = np.zeros((int(np.sum(active)), nv))
    A_diag[:, vars_["sbar"]] = diag_rows[active]
    resid = resid[active]

    rows, eta_col, const = encoding.objective_rows(cfg, spec, basis=basis, fixed=W_bar)
    A_soc = np.zeros((1 + rows.shape[0], nv))
    A_soc[0, vars_["t"].start] = -1.0
    A_soc[1:, vars_["sbar"]] = rows
    A_soc[1:, vars_["eta"].start] = -eta_col
    b_soc = np.concatenate([[0.0], -const])

    psd_cols = encoding.herm_psd_columns(r)
    A_psd = np.zeros((psd_cols.shape[0], nv))
    A_psd[:, vars_["sbar"]] = -psd_cols

    rb = encoding.RowBlocks(nv)
    rb.add("zero", A_diag, resid)
    rb.add("soc", A_soc, b_soc)
    rb.add("psd", A_psd, np.zeros(A_psd.shape[0]), size=2 * r)
    c = np.zeros(nv)
    c[vars_["t"].start] = 1.0

    sol = conic.solve(rb.build(c), solver)
    if sol.status != "optimal":
        raise RuntimeError("null-space sensing stage did not solve: " + sol.status)
    Sb = encoding.params_to_herm(sol.x[vars_["sbar"]], r)
    Sb = model._clip_psd(Sb, worstcase.RESIDUAL_PSD_TOL, "S")
    S = linalg.hermitian_part(basis @ Sb @ basis.conj().T)
    return S, float(sol.x[vars_["eta"].start])


@dataclass(frozen=True)
class SeparateDesign:
    """Two-stage benchmark: rank-one information beam plus null-space sensing."""

    W_bar: np.ndarray
    S_bar: np.ndarray
    eta: float
    gamma: float
    power: float
    objective: float
    status: str
    info: dict

    @property
    def W(self):
        return self.W_bar

    @property
    def S(self):
        return self.S_bar

    @property
    def T(self):
        return self.W_bar + self.S_bar


def solve_separate(instance, settings=None):
    """Run both benchmark stages on a design instance.

    Works for either error model.  Infeasibility in stage 1 or an antenna
    over-spend at the split is reported through `status`, never raised.
    """
    cfg = instance.config
    n = cfg.n
    zero = np.zeros((n, n), dtype=complex)
    pm = solve_powermin(instance, settings)
    if pm.status != "optimal":
        return SeparateDesign(W_bar=pm.W_bar, S_bar=zero, eta=0.0, gamma=pm.gamma,
                              power=pm.power, objective=np.inf, status=pm.status,
                              info=pm.info)
    try:
        S_bar, eta = solve_sep_sensing(pm.W_bar, cfg, instance.spec)
    except ValueError as err:
        info = dict(pm.info)
        info["reason"] = str(err)
        return SeparateDesign(W_bar=pm.W_bar, S_bar=zero, eta=0.0, gamma=pm.gamma,
                              power=pm.power, objective=np.inf, status="infeasible",
                              info=info)
    objective = model.sensing_objective(pm.W_bar, S_bar, eta, cfg, instance.spec)
    return SeparateDesign(W_bar=pm.W_bar, S_bar=S_bar, eta=eta, gamma=pm.gamma,
                          power=pm.power, objective=objective, status="optimal",
                          info={"powermin": pm.info})
