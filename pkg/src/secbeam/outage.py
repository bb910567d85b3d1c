"""Chance-constrained design under Gaussian eavesdropper CSI errors.

Each eavesdropper channel is h_k = h_hat_k + e_k with e_k ~ CN(0, C_k).  The
total secrecy outage budget rho is split evenly, giving each eavesdropper a
per-link budget rho_bar, and each per-link chance constraint is replaced by
its Bernstein-type sufficient condition: one scalar inequality, one second
order cone bound, and one PSD shift bound on quadratic-form tail data.  The
resulting program is again convex for fixed CU SINR gamma and reuses the
same gamma search and rank-one finish as the bounded model.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import encoding, linalg, model, rng, worstcase

CI99_Z = 2.5758293035489004


def per_eve_outage(rho, k_eve):
    """Even split of a total outage budget: 1 - (1 - rho)^(1/K).

    Written via expm1/log1p so the inverse identity with total_outage holds
    to near machine precision even for tiny budgets.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("outage budget must lie in (0, 1)")
    if k_eve < 1:
        raise ValueError("need at least one eavesdropper to split the budget")
    return -np.expm1(np.log1p(-rho) / k_eve)


def total_outage(rho_bar, k_eve):
    """Inverse of per_eve_outage: the budget a per-link level adds up to."""
    if not 0.0 < rho_bar < 1.0:
        raise ValueError("per-link level must lie in (0, 1)")
    if k_eve < 1:
        raise ValueError("need at least one eavesdropper")
    return -np.expm1(k_eve * np.log1p(-rho_bar))


@dataclass(frozen=True)
class OutageInstance:
    """Design data for the Gaussian CSI error model."""

    config: model.SystemConfig
    spec: model.SensingSpec
    r0: float
    rho: float
    cov: np.ndarray

    def __post_init__(self):
        cfg = self.config
        cov = np.asarray(self.cov, dtype=complex).reshape(cfg.k_eve, cfg.n, cfg.n)
        object.__setattr__(self, "cov", cov)
        if not np.isfinite(self.r0) or self.r0 < 0:
            raise ValueError("secrecy target must be finite and nonnegative")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("outage budget must lie in (0, 1)")
        if not np.all(np.isfinite(cov)):
            raise ValueError("covariances must be finite")
        for k in range(cfg.k_eve):
            if not linalg.is_hermitian(cov[k]):
                raise ValueError("covariances must be Hermitian")
        # raises if any covariance is indefinite
        object.__setattr__(
            self, "cov_sqrt", np.stack([linalg.matrix_sqrt_psd(c) for c in cov])
            if cfg.k_eve else np.zeros((0, cfg.n, cfg.n), dtype=complex))

    @classmethod
    def isotropic(cls, config, spec, r0, rho, delta_sq):
        """Independent CN(0, delta_sq I) errors at every eavesdropper."""
        cov = np.stack([delta_sq * np.eye(config.n, dtype=complex)] * config.k_eve) \
            if config.k_eve else np.zeros((0, config.n, config.n), dtype=complex)
        return cls(config, spec, r0, rho, cov)

    @property
    def rho_bar(self):
        return per_eve_outage(self.rho, self.config.k_eve)


@dataclass(frozen=True)
class BTIData:
    """Tail data of one eavesdropper's quadratic secrecy margin.

    The margin at error e = C^(1/2) v is v^H A v + 2 Re(v^H q) + c with
    v ~ CN(0, I); secrecy holds iff the margin is >= 0.
    """

    A: np.ndarray
    q: np.ndarray
    c: float


def bti_data(W, S, gamma, instance, k):
    """Assemble the tail data for eavesdropper k at CU SINR gamma."""
    cfg = instance.config
    ph = model.phi(gamma, instance.r0)
    M = ph * np.asarray(S, dtype=complex) - np.asarray(W, dtype=complex)
    R = instance.cov_sqrt[k]
    h = cfg.h_hat[k]
    A = R @ M @ R
    q = R @ (M @ h)
    c = float(np.real(np.vdot(h, M @ h)) + ph * cfg.sigma_eve_sq[k])
    return BTIData(A=A, q=q, c=c)


def bti_margin(data, rho_bar):
    """Closed-form slack of the Bernstein-type condition (>= 0 means pass).

    Uses the optimal slack values a = sqrt(||A||_F^2 + 2||q||^2) and
    b = max(lambda_max(-A), 0), so this is exactly the best the conic
    encoding can certify for the same data.
    """
    A = linalg.hermitian_part(data.A)
    a = np.sqrt(np.sum(np.abs(A) ** 2) + 2.0 * np.sum(np.abs(data.q) ** 2))
    b = max(float(np.max(np.linalg.eigvalsh(-A))), 0.0)
    tr = float(np.real(np.trace(A)))
    return tr - np.sqrt(-2.0 * np.log(rho_bar)) * a + np.log(rho_bar) * b + data.c


def bti_holds(data, rho_bar, tol=1e-9):
    scale = 1.0 + abs(data.c)
    return bti_margin(data, rho_bar) >= -tol * scale


class P25Encoding:
    """Static rows of the per-gamma cone program for the Gaussian model.

    Variables stack as [W params, S params, eta, a_1..a_K, b_1..b_K, t]; the
    a_k/b_k are the Bernstein slack scalars.  As in the bounded encoding,
    only rows touching phi(gamma) are rebuilt per grid point.
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
            blocks.extend([("a", ke), ("b", ke)])
        blocks.append(("t", 1))
        self.vars = encoding.VarMap(blocks)
        nv = self.vars.n

        cg = float(np.linalg.norm(cfg.g))
        self.sigma0n = cfg.sigma0_sq / cg**2
        self.qf_g = np.real(encoding.quad_form_row(cfg.g / cg))

        if ke:
            ch = np.linalg.norm(cfg.h_hat, axis=1)
            h_unit = cfg.h_hat / ch[:, None]
            self.sigman = cfg.sigma_eve_sq / ch**2
            # normalized error covariances scale with the channel power
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
            eye = np.eye(n, dtype=complex)
            self.eye_col = encoding.embed_svec(eye)[0]

        diag = np.arange(n)
        A_power = np.zeros((n, nv))
        A_power[diag, self.vars["w"].start + diag] = 1.0
        A_power[diag, self.vars["s"].start + diag] = 1.0
        self.A_power = A_power
        self.b_power = np.full(n, cfg.q)

        if ke:
            b_rows = np.zeros((ke, nv))
            b_rows[np.arange(ke), self.vars["b"].start + np.arange(ke)] = -1.0
            self.b_nonneg_rows = b_rows

        rows, eta_col, _ = encoding.objective_rows(cfg, spec)
        A_soc = np.zeros((1 + rows.shape[0], nv))
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

    def problem(self, gamma):
        """Assemble the cone program at one CU SINR point."""
        inst = self.instance
        cfg = inst.config
        n, ke, nv = cfg.n, cfg.k_eve, self.vars.n
        ph = model.phi(gamma, inst.r0)
        if ph <= worstcase.PHI_ZF_TOL and gamma > 0.0 and ke:
            # at a zero leakage cap every tail term is nonpositive, so each
            # constraint forces R_k W R_k = 0 and W h_k = 0: W is confined
            # to the subspace no eavesdropper statistic touches.  When the
            # CU channel has no component there the CU row cannot hold at
            # positive gamma and the point is infeasible by structure.
            pinned = np.vstack([inst.cov_sqrt.reshape(ke * n, n), cfg.h_hat.conj()])
            free = scipy.linalg.null_space(pinned)
            reachable = free.size and np.linalg.norm(
                free.conj().T @ cfg.g) > 1e-12 * np.linalg.norm(cfg.g)
            if not reachable:
                return encoding.infeasible_problem()

        rb = encoding.RowBlocks(nv)
        rb.add("zero", self.A_power, self.b_power)

        cu = np.zeros(nv)
        cu[self.vars["w"]] = -self.qf_g
        cu[self.vars["s"]] = gamma * self.qf_g
        rb.add("nonneg", cu, np.array([-gamma * self.sigma0n]))

        if ke:
            rb_ = inst.rho_bar
            sq2ln = np.sqrt(-2.0 * np.log(rb_))
            lnrb = np.log(rb_)
            trace_rows = np.zeros((ke, nv))
            for k in range(ke):
                trace_rows[k, self.vars["w"]] = self.trace_qf[k]
                trace_rows[k, self.vars["s"]] = -ph * self.trace_qf[k]
                trace_rows[k, self.vars["a"].start + k] = sq2ln
                trace_rows[k, self.vars["b"].start + k] = -lnrb
            rb.add("nonneg", trace_rows, ph * self.sigman)
            rb.add("nonneg", self.b_nonneg_rows, np.zeros(ke))

        rb.add("soc", self.A_soc, np.zeros(self.A_soc.shape[0]))
        if ke:
            for k in range(ke):
                resp = self.soc_resp[k]
                A_bti = np.zeros((1 + resp.shape[0], nv))
                A_bti[0, self.vars["a"].start + k] = -1.0
                A_bti[1:, self.vars["w"]] = resp
                A_bti[1:, self.vars["s"]] = -ph * resp
                rb.add("soc", A_bti, np.zeros(A_bti.shape[0]))

        rb.add("psd", self.A_psd_w, np.zeros(self.A_psd_w.shape[0]), size=2 * n)
        rb.add("psd", self.A_psd_s, np.zeros(self.A_psd_s.shape[0]), size=2 * n)
        if ke:
            for k in range(ke):
                resp = self.psd_resp[k]
                A_shift = np.zeros((resp.shape[0], nv))
                A_shift[:, self.vars["w"]] = resp
                A_shift[:, self.vars["s"]] = -ph * resp
                A_shift[:, self.vars["b"].start + k] = -self.eye_col
                rb.add("psd", A_shift, np.zeros(resp.shape[0]), size=2 * n)
        return rb.build(self.c)

    def extract(self, x):
        n = self.instance.config.n
        W = encoding.params_to_herm(x[self.vars["w"]], n)
        S = encoding.params_to_herm(x[self.vars["s"]], n)
        return W, S, float(x[self.vars["eta"].start])


def build_p25(instance, gamma):
    """One-shot cone program for the Gaussian model at a fixed CU SINR."""
    return P25Encoding(instance).problem(gamma)


def solve_p2(instance, settings=None):
    """Chance-constrained design for an OutageInstance."""
    return worstcase.run_pipeline(P25Encoding(instance), settings)


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo secrecy outage estimate with a 99% normal interval."""

    p_hat: float
    ci99: float
    samples: int
    seed: int


def empirical_outage(W, S, instance, samples=100000, seed=0):
    """Estimate Pr{secrecy rate < r0} under the Gaussian error model.

    All eavesdropper channels are perturbed independently per draw; the rate
    uses the worst of them.  Counter-based streams keyed by (seed, k) make
    the estimate reproducible and allow common random numbers across designs.
    """
    cfg = instance.config
    if cfg.k_eve == 0:
        return OutageEstimate(p_hat=0.0, ci99=0.0, samples=samples, seed=seed)
    rate_cu = np.log2(1.0 + model.sinr_cu(W, S, cfg.g, cfg.sigma0_sq))
    worst_eve = np.zeros(samples)
    for k in range(cfg.k_eve):
        gen = rng.stream(seed, "outage", k)
        v = rng.crandn(gen, samples, cfg.n)
        hs = cfg.h_hat[k] + v @ instance.cov_sqrt[k].T
        num = np.real(np.einsum("si,ij,sj->s", hs.conj(), W, hs))
        den = np.real(np.einsum("si,ij,sj->s", hs.conj(), S, hs)) + cfg.sigma_eve_sq[k]
        worst_eve = np.maximum(worst_eve, np.log2(1.0 + num / den))
    rates = np.maximum(rate_cu - worst_eve, 0.0)
    p_hat = float(np.mean(rates < instance.r0 - 1e-12))
    ci = CI99_Z * np.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / samples)
    return OutageEstimate(p_hat=p_hat, ci99=float(ci), samples=samples, seed=seed)
