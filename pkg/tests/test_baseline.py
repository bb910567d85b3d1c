"""Tests for the separate information / sensing benchmark."""

import dataclasses

import numpy as np
import pytest

from conftest import reference_config, reference_spec
from secbeam import baseline, conic, model, outage, rng, search, worstcase


def small_settings(points=8):
    # loose grid is enough to rank gammas; stage-2 solves stay tight
    return search.SearchSettings(
        points=points,
        grid_solver=conic.SolverSettings(tol=1e-4, max_iters=25000),
        final_solver=conic.SolverSettings(tol=1e-4, max_iters=50000),
    )


def perfect_instance(r0=4.0, m=60, **kw):
    cfg = reference_config(**kw)
    return worstcase.WorstCaseInstance(cfg, reference_spec(m=m), r0, np.zeros(cfg.k_eve))


def orthogonal_eve_config(seed=11):
    """Single eavesdropper exactly orthogonal to the CU channel."""
    cfg = reference_config()
    gen = rng.stream(seed, "orthogonal-eve")
    h = rng.crandn(gen, cfg.n)
    h = h - cfg.g * (np.vdot(cfg.g, h) / np.real(np.vdot(cfg.g, cfg.g)))
    h = h * np.sqrt(8e-3) / np.linalg.norm(h)
    return dataclasses.replace(cfg, k_eve=1, h_hat=h[None, :], sigma_eve_sq=np.array([1e-8]))


def colocated_eve_config():
    """Strong eavesdropper on the CU channel direction: never securable."""
    cfg = reference_config()
    h = cfg.g / np.linalg.norm(cfg.g) * np.sqrt(8e-3)
    return dataclasses.replace(cfg, k_eve=1, h_hat=h[None, :], sigma_eve_sq=np.array([1e-8]))


class TestNullspaceProjector:
    def test_reference_channel(self):
        cfg = reference_config()
        Q = baseline.nullspace_projector(cfg.g)
        scale = np.linalg.norm(cfg.g)
        assert np.linalg.norm(Q @ cfg.g) <= 1e-12 * scale
        assert np.allclose(Q @ Q, Q, atol=1e-13)
        assert np.allclose(Q, Q.conj().T, atol=1e-14)
        assert abs(np.trace(Q).real - (cfg.n - 1)) < 1e-10

    def test_random_channels(self):
        gen = rng.stream(5, "projector")
        for _ in range(25):
            g = rng.crandn(gen, 6)
            Q = baseline.nullspace_projector(g)
            assert np.linalg.norm(Q @ g) <= 1e-12 * np.linalg.norm(g)
            assert np.allclose(Q @ Q, Q, atol=1e-12)
            assert abs(np.trace(Q).real - 5) < 1e-9

    def test_bad_channels_raise(self):
        with pytest.raises(ValueError):
            baseline.nullspace_projector(np.zeros(4, dtype=complex))
        with pytest.raises(ValueError):
            baseline.nullspace_projector(np.full(4, np.nan + 0j))

    def test_complement_basis_spans_projector(self):
        cfg = reference_config()
        B = baseline._complement_basis(cfg.g)
        assert B.shape == (cfg.n, cfg.n - 1)
        assert np.allclose(B.conj().T @ B, np.eye(cfg.n - 1), atol=1e-12)
        assert np.linalg.norm(B.conj().T @ cfg.g) <= 1e-12 * np.linalg.norm(cfg.g)
        assert np.allclose(B @ B.conj().T, baseline.nullspace_projector(cfg.g), atol=1e-12)


class TestPowerMin:
    def test_orthogonal_eve_aligned_beam(self):
        cfg = orthogonal_eve_config()
        inst = worstcase.WorstCaseInstance(cfg, reference_spec(m=60), 4.0, np.zeros(1))
        pm = baseline.solve_powermin(inst, small_settings())
        assert pm.status == "optimal"
        lo = 2.0**inst.r0 - 1.0
        assert pm.gamma == pytest.approx(lo, rel=1e-12)
        g2 = float(np.real(np.vdot(cfg.g, cfg.g)))
        assert pm.power == pytest.approx(lo * cfg.sigma0_sq / g2, rel=1e-9)
        aligned = pm.power * np.outer(cfg.g, cfg.g.conj()) / g2
        assert np.linalg.norm(pm.W_bar - aligned) <= 1e-9 * pm.power

    def test_no_eves_is_mrt(self):
        inst = perfect_instance(k_eve=0)
        pm = baseline.solve_powermin(inst, small_settings())
        cfg = inst.config
        lo = 2.0**inst.r0 - 1.0
        g2 = float(np.real(np.vdot(cfg.g, cfg.g)))
        assert pm.status == "optimal"
        assert pm.power == pytest.approx(lo * cfg.sigma0_sq / g2, rel=1e-9)

    def test_zero_rate_needs_no_power(self):
        inst = perfect_instance(r0=0.0)
        pm = baseline.solve_powermin(inst, small_settings())
        assert pm.status == "optimal"
        assert pm.gamma == 0.0
        assert pm.power == 0.0
        assert not pm.W_bar.any()

    def test_strong_eves_use_zero_forcing(self):
        inst = perfect_instance()
        cfg = inst.config
        pm = baseline.solve_powermin(inst, small_settings())
        assert pm.status == "optimal"
        assert pm.info["finish"] == "zero-forcing closed form"
        assert model.is_rank_one(pm.W_bar)
        Z = np.zeros_like(pm.W_bar)
        sinr = model.sinr_cu(pm.W_bar, Z, cfg.g, cfg.sigma0_sq)
        assert sinr == pytest.approx(pm.gamma, rel=1e-9)
        assert worstcase.verify_worst_case(pm.W_bar, Z, pm.gamma, inst).all_ok
        # zero forcing costs at least the aligned-beam power
        g2 = float(np.real(np.vdot(cfg.g, cfg.g)))
        assert pm.power >= pm.gamma * cfg.sigma0_sq / g2 - 1e-12
        assert pm.power <= cfg.n * cfg.q

    def test_colocated_eve_infeasible(self):
        cfg = colocated_eve_config()
        inst = worstcase.WorstCaseInstance(cfg, reference_spec(m=60), 4.0, np.zeros(1))
        pm = baseline.solve_powermin(inst, small_settings())
        assert pm.status == "infeasible"
        assert {row[2] for row in pm.info["gamma_grid"]} == {"primal_infeasible"}
        sep = baseline.solve_separate(inst, small_settings())
        assert sep.status == "infeasible"
        assert sep.objective == np.inf

    def test_error_radius_costs_power(self):
        # weak eavesdroppers keep the no-AN robust problem feasible
        cfg = reference_config(eve_gain=1e-8)
        spec = reference_spec(m=60)
        ch = np.linalg.norm(cfg.h_hat, axis=1)
        i0 = worstcase.WorstCaseInstance(cfg, spec, 4.0, np.zeros(2))
        ir = worstcase.WorstCaseInstance(cfg, spec, 4.0, 0.05 * ch)
        p0 = baseline.solve_powermin(i0, small_settings())
        pr = baseline.solve_powermin(ir, small_settings())
        assert p0.status == "optimal" and pr.status == "optimal"
        assert pr.power >= p0.power * (1.0 + 1e-6)
        Z = np.zeros_like(pr.W_bar)
        sinr = model.sinr_cu(pr.W_bar, Z, cfg.g, cfg.sigma0_sq)
        assert abs(sinr - pr.gamma) <= 1e-3 * pr.gamma
        assert worstcase.verify_worst_case(pr.W_bar, Z, pr.gamma, ir).all_ok

    def test_gaussian_powermin(self):
        cfg = reference_config(eve_gain=1e-8)
        gi = outage.OutageInstance.isotropic(cfg, reference_spec(m=60), 2.5, 0.1,
                                             delta_sq=0.02 * 1e-8)
        pm = baseline.solve_powermin(gi, small_settings())
        assert pm.status == "optimal"
        assert model.is_rank_one(pm.W_bar)
        Z = np.zeros_like(pm.W_bar)
        sinr = model.sinr_cu(pm.W_bar, Z, cfg.g, cfg.sigma0_sq)
        assert abs(sinr - pm.gamma) <= 1e-3 * pm.gamma
        for k in range(cfg.k_eve):
            data = outage.bti_data(pm.W_bar, Z, pm.gamma, gi, k)
            assert outage.bti_holds(data, gi.rho_bar, tol=1e-6)

    def test_gaussian_strong_errors_infeasible(self):
        # without artificial noise the reference error power cannot be secured
        gi = outage.OutageInstance.isotropic(reference_config(), reference_spec(m=60),
                                             2.5, 0.1, delta_sq=3e-4)
        pm = baseline.solve_powermin(gi, small_settings())
        assert pm.status == "infeasible"


class TestSepSensing:
    def test_nullspace_and_diag(self):
        cfg = reference_config()
        spec = reference_spec(m=60)
        W_bar = baseline._zf_powermin(cfg, 15.0)
        S, eta = baseline.solve_sep_sensing(W_bar, cfg, spec)
        assert np.isfinite(eta)
        assert np.min(np.linalg.eigvalsh(S)) >= -1e-9 * cfg.q
        assert np.linalg.norm(S @ cfg.g) <= 1e-7 * np.linalg.norm(cfg.g)
        diag = np.real(np.diag(W_bar + S))
        assert np.max(np.abs(diag - cfg.q)) <= 1e-6

    def test_overspent_antenna_raises(self):
        cfg = reference_config()
        W_bad = np.zeros((cfg.n, cfg.n), dtype=complex)
        W_bad[0, 0] = 1.5 * cfg.q
        with pytest.raises(ValueError):
            baseline.solve_sep_sensing(W_bad, cfg, reference_spec(m=60))

    def test_saturated_antenna_gets_zero_sensing_power(self):
        cfg = reference_config()
        W_sat = np.zeros((cfg.n, cfg.n), dtype=complex)
        W_sat[0, 0] = cfg.q
        S, _ = baseline.solve_sep_sensing(W_sat, cfg, reference_spec(m=60))
        assert abs(np.real(S[0, 0])) <= 1e-6
        diag = np.real(np.diag(W_sat + S))
        assert np.max(np.abs(diag - cfg.q)) <= 1e-6

    def test_restriction_never_beats_unconstrained_sensing(self):
        cfg = reference_config()
        spec = reference_spec(m=60)
        Z = np.zeros((cfg.n, cfg.n), dtype=complex)
        S, eta = baseline.solve_sep_sensing(Z, cfg, spec)
        d0 = model.sensing_objective(Z, S, eta, cfg, spec)
        sen = worstcase.solve_sensing_only(cfg, spec)
        assert d0 >= sen.objective - 1e-9


class TestSeparateDesign:
    def test_reference_ordering_and_rate(self):
        inst = perfect_instance()
        cfg = inst.config
        sep = baseline.solve_separate(inst, small_settings())
        joint = worstcase.solve_p1(inst, search.SearchSettings(points=8))
        sen = worstcase.solve_sensing_only(cfg, inst.spec)
        assert sep.status == "optimal" and joint.status == "optimal"
        assert sen.objective <= joint.objective + 1e-6
        assert joint.objective <= sep.objective + 1e-6

        assert model.is_rank_one(sep.W_bar)
        assert np.linalg.norm(sep.S_bar @ cfg.g) <= 1e-7 * np.linalg.norm(cfg.g)
        assert np.max(np.abs(np.real(np.diag(sep.T)) - cfg.q)) <= 1e-6

        Z = np.zeros_like(sep.W_bar)
        rate_before = model.secrecy_rate(sep.W_bar, Z, cfg.g, cfg.h_hat,
                                         cfg.sigma0_sq, cfg.sigma_eve_sq)
        rate_after = model.secrecy_rate(sep.W_bar, sep.S_bar, cfg.g, cfg.h_hat,
                                        cfg.sigma0_sq, cfg.sigma_eve_sq)
        assert rate_after >= rate_before - 1e-12
        assert rate_after >= inst.r0 - 1e-3
        # sensing power is invisible to the CU
        sinr0 = model.sinr_cu(sep.W_bar, Z, cfg.g, cfg.sigma0_sq)
        sinr1 = model.sinr_cu(sep.W_bar, sep.S_bar, cfg.g, cfg.sigma0_sq)
        assert sinr1 == pytest.approx(sinr0, rel=1e-9)
        assert worstcase.verify_worst_case(sep.W_bar, sep.S_bar, sep.gamma, inst).all_ok

    def test_gaussian_separate(self):
        cfg = reference_config(eve_gain=1e-8)
        gi = outage.OutageInstance.isotropic(cfg, reference_spec(m=60), 2.5, 0.1,
                                             delta_sq=0.02 * 1e-8)
        sep = baseline.solve_separate(gi, small_settings())
        assert sep.status == "optimal"
        assert np.linalg.norm(sep.S_bar @ cfg.g) <= 1e-7 * np.linalg.norm(cfg.g)
        assert np.max(np.abs(np.real(np.diag(sep.T)) - cfg.q)) <= 1e-6
        est = outage.empirical_outage(sep.W_bar, sep.S_bar, gi, samples=20000, seed=3)
        assert est.p_hat <= gi.rho
        joint = outage.solve_p2(gi, search.SearchSettings(points=10))
        assert joint.status == "optimal"
        assert joint.objective <= sep.objective + 1e-6
