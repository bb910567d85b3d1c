"""Robust joint design under norm-bounded eavesdropper CSI errors.

The secrecy constraint "rate >= r0 for every channel in the error ball" is
enforced through one S-procedure linear matrix inequality per eavesdropper.
For a fixed CU SINR gamma the design is a cone program; the scalar gamma is
then searched over its feasible interval.  The final covariance split is
restored to rank one in closed form, which keeps every constraint satisfied
and the objective unchanged.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import conic, encoding, linalg, model, search

GOLDEN_EVALS = 60
DEGENERATE_POWER = 1e-12  # matches the rank-one construction's own floor
RESIDUAL_PSD_TOL = 1e-5  # relative; first-order solves leave ~tol-level negatives
PHI_ZF_TOL = 1e-12  # leakage allowance below this forces exact zero-forcing


@dataclass(frozen=True)
class WorstCaseInstance:
    """Design data for the bounded (norm-ball) CSI error model."""

    config: model.SystemConfig
    spec: model.SensingSpec
    r0: float
    epsilons: np.ndarray

    def __post_init__(self):
        eps = np.atleast_1d(np.asarray(self.epsilons, dtype=float))
        object.__setattr__(self, "epsilons", eps)
        if eps.shape != (self.config.k_eve,):
            raise ValueError("need one error radius per eavesdropper")
        if not np.all(np.isfinite(eps)) or np.any(eps < 0):
            raise ValueError("error radii must be finite and nonnegative")
        if not np.isfinite(self.r0) or self.r0 < 0:
            raise ValueError("secrecy target must be finite and nonnegative")

    @classmethod
    def from_error_model(cls, config, spec, r0, errors):
        if errors.variant == "gaussian":
            raise ValueError("gaussian errors use the outage pipeline, not the worst-case one")
        if errors.variant == "perfect":
            eps = np.zeros(config.k_eve)
        else:
            eps = np.asarray(errors.epsilons, dtype=float)
        return cls(config, spec, r0, eps)


def s_procedure_lmi(W, S, lam, gamma, instance, k):
    """The robust secrecy LMI block for eavesdropper k at multiplier lam.

    Block(lam) = [[lam*I - V,            -V h_k],
                  [-h_k^H V,  -lam*eps_k^2 - h_k^H V h_k + phi*sigma^2]]
    with V = W - phi(gamma) * S.  The secrecy constraint holds over the whole
    error ball iff Block(lam) is PSD for some lam >= 0.
    """
    cfg = instance.config
    ph = model.phi(gamma, instance.r0)
    V = np.asarray(W, dtype=complex) - ph * np.asarray(S, dtype=complex)
    h = cfg.h_hat[k]
    n = cfg.n
    block = np.zeros((n + 1, n + 1), dtype=complex)
    Vh = V @ h
    block[:n, :n] = lam * np.eye(n) - V
    block[:n, n] = -Vh
    block[n, :n] = -Vh.conj()
    block[n, n] = (
        -lam * instance.epsilons[k] ** 2 - np.real(np.vdot(h, Vh)) + ph * cfg.sigma_eve_sq[k]
    )
    return block


@dataclass(frozen=True)
class WorstCaseCheck:
    """Per-eavesdropper S-procedure verification result."""

    ok: np.ndarray
    margins: np.ndarray
    multipliers: np.ndarray

    @property
    def all_ok(self):
        return bool(np.all(self.ok))


def verify_worst_case(W, S, gamma, instance, tol=1e-9):
    """Search the multiplier for each eavesdropper and report PSD margins.

    The smallest eigenvalue of the LMI block is concave in lam, so a
    golden-section search finds its maximum.  The maximizer can sit near
    lam_max(V) + ||V h_k|| / eps_k (the coupling term dominates for small
    radii), so the interval scales with 1/eps; a zero-radius ball is a
    single point and is checked against the nominal SINR cap directly,
    since its LMI certificate exists only in the lam -> inf limit.  For
    that case the reported margin is the quadratic slack and the
    multiplier is inf.
    """
    cfg = instance.config
    ph = model.phi(gamma, instance.r0)
    V = linalg.hermitian_part(np.asarray(W, dtype=complex) - ph * np.asarray(S, dtype=complex))
    lam_top = max(float(np.max(np.linalg.eigvalsh(V))), 0.0)

    ok = np.zeros(cfg.k_eve, dtype=bool)
    margins = np.full(cfg.k_eve, -np.inf)
    lams = np.zeros(cfg.k_eve)
    for k in range(cfg.k_eve):
        eps = float(instance.epsilons[k])
        if eps == 0.0:
            h = cfg.h_hat[k]
            lhs = float(np.real(np.vdot(h, V @ h)))
            rhs = ph * cfg.sigma_eve_sq[k]
            margins[k] = rhs - lhs
            lams[k] = np.inf
            ok[k] = margins[k] >= -tol * (1.0 + abs(lhs) + abs(rhs))
            continue

        lam_hi = lam_top + float(np.linalg.norm(V @ cfg.h_hat[k])) / eps + 1.0

        def min_eig(lam):
            return float(np.linalg.eigvalsh(s_procedure_lmi(W, S, lam, gamma, instance, k))[0])

        a, b = 0.0, lam_hi
        x1 = b - search.INVPHI * (b - a)
        x2 = a + search.INVPHI * (b - a)
        f1, f2 = min_eig(x1), min_eig(x2)
        for _ in range(GOLDEN_EVALS):
            if f1 >= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - search.INVPHI * (b - a)
                f1 = min_eig(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + search.INVPHI * (b - a)
                f2 = min_eig(x2)
        cands = [(min_eig(0.0), 0.0), (f1, x1), (f2, x2), (min_eig(lam_hi), lam_hi)]
        margin, lam_best = max(cands, key=lambda t: t[0])
        scale = 1.0 + float(np.max(np.abs(s_procedure_lmi(W, S, lam_best, gamma, instance, k))))
        margins[k] = margin
        lams[k] = lam_best
        ok[k] = margin >= -tol * scale
    return WorstCaseCheck(ok=ok, margins=margins, multipliers=lams)


class P14Encoding:
    """Static rows of the per-gamma cone program for the bounded model.

    Variables stack as [W params, S params, eta, lam_1..lam_K, t] where W and
    S use the n^2 real Hermitian parametrization and t is the epigraph of the
    matching residual norm, so the optimal objective is sqrt(D).  Only the CU
    SINR row and the LMI blocks depend on gamma; everything else is built
    once here and reused across the grid.
    """

    def __init__(self, instance):
        cfg = instance.config
        spec = instance.spec
        if spec.omega_c > 0 and cfg.k_targets < 2:
            raise ValueError("cross-correlation penalty needs at least two targets")
        self.instance = instance
        n = cfg.n
        ke = cfg.k_eve
        nw = encoding.herm_param_count(n)

        blocks = [("w", nw), ("s", nw), ("eta", 1)]
        if ke:
            blocks.append(("lam", ke))
        blocks.append(("t", 1))
        self.vars = encoding.VarMap(blocks)
        nv = self.vars.n

        # unit-norm channels keep all rows near unit scale; the CU row and
        # the LMIs are exactly invariant once noise and radii are compensated
        cg = float(np.linalg.norm(cfg.g))
        self.sigma0n = cfg.sigma0_sq / cg**2
        self.qf_g = np.real(encoding.quad_form_row(cfg.g / cg))
        if ke:
            ch = np.linalg.norm(cfg.h_hat, axis=1)
            h_unit = cfg.h_hat / ch[:, None]
            self.sigman = cfg.sigma_eve_sq / ch**2
            self.epsn = instance.epsilons / ch
            self.lmi_resp = [encoding.lmi_columns_response(h_unit[k]) for k in range(ke)]
            self.lmi_lam = [encoding.lmi_lambda_column(n, self.epsn[k]) for k in range(ke)]
            self.lmi_const = encoding.lmi_constant(n, 1.0)

        diag = np.arange(n)
        A_power = np.zeros((n, nv))
        A_power[diag, self.vars["w"].start + diag] = 1.0
        A_power[diag, self.vars["s"].start + diag] = 1.0
        self.A_power = A_power
        self.b_power = np.full(n, cfg.q)

        if ke:
            lam_rows = np.zeros((ke, nv))
            lam_rows[np.arange(ke), self.vars["lam"].start + np.arange(ke)] = -1.0
            self.lam_rows = lam_rows

        rows, eta_col, _ = encoding.objective_rows(cfg, spec)
        n_res = rows.shape[0]
        A_soc = np.zeros((1 + n_res, nv))
        A_soc[0, self.vars["t"].start] = -1.0
        A_soc[1:, self.vars["w"]] = rows
        A_soc[1:, self.vars["s"]] = rows
        A_soc[1:, self.vars["eta"].start] = -eta_col
        self.A_soc = A_soc

        psd_cols = encoding.herm_psd_columns(n)
        self.A_psd_w = np.zeros((psd_cols.shape[0], nv))
        self.A_psd_w[:, self.vars["w"]] = -psd_cols
        self.A_psd_s = np.zeros((psd_cols.shape[0], nv))
        self.A_psd_s[:, self.vars["s"]] = -psd_cols

        self.c = np.zeros(nv)
        self.c[self.vars["t"].start] = 1.0

        # at exact CSI the phi = 0 endpoint pins W's range off the
        # eavesdropper span; that subproblem has no strict interior, so a
        # reduced exact reparametrization replaces the LMIs there
        self.zf = None
        if ke and np.all(instance.epsilons == 0.0):
            self._build_zf(cfg, spec)

    def _build_zf(self, cfg, spec):
        n = cfg.n
        basis = scipy.linalg.null_space(cfg.h_hat.conj())
        if basis.shape[1] == 0:
            return
        nx = encoding.herm_param_count(basis.shape[1])
        nw = encoding.herm_param_count(n)
        zf_vars = encoding.VarMap([("x", nx), ("s", nw), ("eta", 1), ("t", 1)])
        nv = zf_vars.n
        cg = float(np.linalg.norm(cfg.g))

        diag = np.arange(n)
        A_power = np.zeros((n, nv))
        A_power[:, zf_vars["x"]] = encoding.quad_form_rows(basis.conj().T)
        A_power[diag, zf_vars["s"].start + diag] = 1.0

        qf_g_x = np.real(encoding.quad_form_row(basis.conj().T @ (cfg.g / cg)))

        rows_x, eta_col, _ = encoding.objective_rows(cfg, spec, basis=basis)
        rows_s, _, _ = encoding.objective_rows(cfg, spec)
        A_soc = np.zeros((1 + rows_x.shape[0], nv))
        A_soc[0, zf_vars["t"].start] = -1.0
        A_soc[1:, zf_vars["x"]] = rows_x
        A_soc[1:, zf_vars["s"]] = rows_s
        A_soc[1:, zf_vars["eta"].start] = -eta_col

        psd_x = encoding.herm_psd_columns(basis.shape[1])
        A_psd_x = np.zeros((psd_x.shape[0], nv))
        A_psd_x[:, zf_vars["x"]] = -psd_x
        psd_s = encoding.herm_psd_columns(n)
        A_psd_s = np.zeros((psd_s.shape[0], nv))
        A_psd_s[:, zf_vars["s"]] = -psd_s

        c = np.zeros(nv)
        c[zf_vars["t"].start] = 1.0
        self.zf = {"basis": basis, "vars": zf_vars, "A_power": A_power,
                   "qf_g_x": qf_g_x, "A_soc": A_soc, "A_psd_x": A_psd_x,
                   "A_psd_s": A_psd_s, "c": c}

    def _zf_problem(self, gamma):
        cfg = self.instance.config
        zf = self.zf
        zf_vars = zf["vars"]
        nv = zf_vars.n
        side = zf["basis"].shape[1]
        rb = encoding.RowBlocks(nv)
        rb.add("zero", zf["A_power"], self.b_power)
        cu = np.zeros(nv)
        cu[zf_vars["x"]] = -zf["qf_g_x"]
        cu[zf_vars["s"]] = gamma * self.qf_g
        rb.add("nonneg", cu, np.array([-gamma * self.sigma0n]))
        rb.add("soc", zf["A_soc"], np.zeros(zf["A_soc"].shape[0]))
        rb.add("psd", zf["A_psd_x"], np.zeros(zf["A_psd_x"].shape[0]), size=2 * side)
        rb.add("psd", zf["A_psd_s"], np.zeros(zf["A_psd_s"].shape[0]), size=2 * cfg.n)
        return rb.build(zf["c"])

    def problem(self, gamma):
        """Assemble the cone program at one CU SINR point."""
        cfg = self.instance.config
        n, ke, nv = cfg.n, cfg.k_eve, self.vars.n
        ph = model.phi(gamma, self.instance.r0)
        if self.zf is not None and ph <= PHI_ZF_TOL:
            return self._zf_problem(gamma)
        if ph <= PHI_ZF_TOL and gamma > 0.0 and np.any(self.instance.epsilons > 0):
            # a zero leakage cap over a full-dimensional error ball forces
            # W = 0 exactly (the LMI corner needs lam = 0 and W h = 0, then
            # -W >= 0), contradicting the CU row at positive gamma; hand the
            # grid a certified-infeasible stub instead of an empty-interior
            # program the splitting iteration cannot decide
            return encoding.infeasible_problem()

        rb = encoding.RowBlocks(nv)
        rb.add("zero", self.A_power, self.b_power)

        cu = np.zeros(nv)
        cu[self.vars["w"]] = -self.qf_g
        cu[self.vars["s"]] = gamma * self.qf_g
        rb.add("nonneg", cu, np.array([-gamma * self.sigma0n]))
        if ke:
            rb.add("nonneg", self.lam_rows, np.zeros(ke))

        rb.add("soc", self.A_soc, np.zeros(self.A_soc.shape[0]))
        rb.add("psd", self.A_psd_w, np.zeros(self.A_psd_w.shape[0]), size=2 * n)
        rb.add("psd", self.A_psd_s, np.zeros(self.A_psd_s.shape[0]), size=2 * n)
        for k in range(ke):
            resp = self.lmi_resp[k]
            A_lmi = np.zeros((resp.shape[0], nv))
            A_lmi[:, self.vars["w"]] = -resp
            A_lmi[:, self.vars["s"]] = ph * resp
            A_lmi[:, self.vars["lam"].start + k] = -self.lmi_lam[k]
            rb.add("psd", A_lmi, (ph * self.sigman[k]) * self.lmi_const, size=2 * (n + 1))
        return rb.build(self.c)

    def extract(self, x):
        """Split a solver iterate into (W, S, eta).

        Reduced zero-forcing iterates are recognized by their length and
        mapped back through the eavesdropper-complement basis.
        """
        n = self.instance.config.n
        if self.zf is not None and len(x) == self.zf["vars"].n:
            zf_vars = self.zf["vars"]
            basis = self.zf["basis"]
            X = encoding.params_to_herm(x[zf_vars["x"]], basis.shape[1])
            W = linalg.hermitian_part(basis @ X @ basis.conj().T)
            S = encoding.params_to_herm(x[zf_vars["s"]], n)
            return W, S, float(x[zf_vars["eta"].start])
        W = encoding.params_to_herm(x[self.vars["w"]], n)
        S = encoding.params_to_herm(x[self.vars["s"]], n)
        return W, S, float(x[self.vars["eta"].start])


def build_p14(instance, gamma):
    """One-shot cone program for the bounded model at a fixed CU SINR."""
    return P14Encoding(instance).problem(gamma)


def finish_design(enc, sol, gamma, info):
    """Shared post-solve pipeline: clip, repair the diagonal, go rank one.

    Works for any encoding exposing .instance (config/spec) and .extract.
    The rank-one extraction preserves the CU SINR exactly and can only lower
    every eavesdropper's SINR, so both robust models keep their guarantees.
    """
    inst = enc.instance
    cfg = inst.config
    W_t, S_t, eta = enc.extract(sol.x)
    # the x-side matrices satisfy cone membership only up to the solver
    # tolerance; clip at a safely larger threshold (real failures are orders
    # of magnitude worse) and hand exactly-PSD inputs to the construction
    W_c = model._clip_psd(W_t, RESIDUAL_PSD_TOL, "W")
    S_c = model._clip_psd(S_t, RESIDUAL_PSD_TOL, "S")
    W_r, S_r = model.repair_diagonal(W_c, S_c, cfg.q)

    if gamma == 0.0 or np.real(np.vdot(cfg.g, W_r @ cfg.g)) <= DEGENERATE_POWER:
        # zero rate target: no information power is needed and the secrecy
        # LMIs pin W to zero, so keep all power in the sensing part
        W_star = np.zeros_like(W_r)
        S_star = W_r + S_r
    else:
        W_star, S_star = model.rank_one_construct(W_r, S_r, cfg.g)

    objective = model.sensing_objective(W_star, S_star, eta, cfg, inst.spec)
    info = dict(info)
    info["solver"] = {
        "iterations": sol.iterations,
        "solve_time": sol.solve_time,
        "residuals": sol.residuals,
    }
    return model.Design(
        W=W_star,
        S=S_star,
        eta=eta,
        gamma=float(gamma),
        rank_one=model.is_rank_one(W_star),
        status="optimal",
        objective=objective,
        info=info,
    )


def run_pipeline(enc, settings=None):
    """Gamma grid search, final tight solve, rank-one finish.

    Returns a Design whose W is exactly rank one (or zero when the rate
    target is zero and no information power is required).  The design is
    declared "infeasible" only when every grid point produced an
    infeasibility certificate; unconverged points downgrade the verdict to
    "max_iters" so a timeout never counts as a proof.
    """
    settings = settings or search.SearchSettings()
    instance = enc.instance
    n = instance.config.n
    lo, hi = model.gamma_interval(instance.r0, instance.config)
    best_gamma, table = search.grid_minimize(enc.problem, lo, hi, settings)
    info = {"gamma_interval": (lo, hi), "gamma_grid": table}
    if best_gamma is None:
        statuses = {row[2] for row in table}
        status = "infeasible" if statuses == {"primal_infeasible"} else "max_iters"
        return model.Design(
            W=np.zeros((n, n), dtype=complex), S=np.zeros((n, n), dtype=complex),
            status=status, objective=np.inf, info=info)
    sol = conic.solve(enc.problem(best_gamma), settings.final_solver)
    if sol.status != "optimal":
        info["final_status"] = sol.status
        return model.Design(
            W=np.zeros((n, n), dtype=complex), S=np.zeros((n, n), dtype=complex),
            status=sol.status, objective=np.inf, info=info)
    return finish_design(enc, sol, best_gamma, info)


def solve_p1(instance, settings=None):
    """Bounded-error design for a WorstCaseInstance."""
    return run_pipeline(P14Encoding(instance), settings)


def solve_sensing_only(config, spec, solver=None):
    """Sensing lower bound: best matching error with no secrecy constraints.

    Only the per-antenna power rows and T >= 0 remain, so this design lower
    bounds every secure design's objective.
    """
    solver = solver or conic.SolverSettings(tol=1e-7)
    n = config.n
    nw = encoding.herm_param_count(n)
    vars_ = encoding.VarMap([("tmat", nw), ("eta", 1), ("t", 1)])
    nv = vars_.n

    diag = np.arange(n)
    A_power = np.zeros((n, nv))
    A_power[diag, vars_["tmat"].start + diag] = 1.0

    rows, eta_col, _ = encoding.objective_rows(config, spec)
    A_soc = np.zeros((1 + rows.shape[0], nv))
    A_soc[0, vars_["t"].start] = -1.0
    A_soc[1:, vars_["tmat"]] = rows
    A_soc[1:, vars_["eta"].start] = -eta_col

    psd_cols = encoding.herm_psd_columns(n)
    A_psd = np.zeros((psd_cols.shape[0], nv))
    A_psd[:, vars_["tmat"]] = -psd_cols

    rb = encoding.RowBlocks(nv)
    rb.add("zero", A_power, np.full(n, config.q))
    rb.add("soc", A_soc, np.zeros(A_soc.shape[0]))
    rb.add("psd", A_psd, np.zeros(A_psd.shape[0]), size=2 * n)
    c = np.zeros(nv)
    c[vars_["t"].start] = 1.0

    sol = conic.solve(rb.build(c), solver)
    if sol.status != "optimal":
        return model.Design(status=sol.status, objective=np.inf,
                            info={"solver_status": sol.status})
    T_t = encoding.params_to_herm(sol.x[vars_["tmat"]], n)
    eta = float(sol.x[vars_["eta"].start])
    T_c = model._clip_psd(T_t, RESIDUAL_PSD_TOL, "T")
    zero = np.zeros_like(T_c)
    T_r, _ = model.repair_diagonal(T_c, zero, config.q)
    objective = model.sensing_objective(zero, T_r, eta, config, spec)
    return model.Design(
        W=zero,
        S=T_r,
        eta=eta,
        rank_one=False,
        status="optimal",
        objective=objective,
        info={"solver": {"iterations": sol.iterations, "solve_time": sol.solve_time,
                         "residuals": sol.residuals}},
    )
