"""Tests for the echo simulation and Capon angle estimation."""

import numpy as np
import pytest

from conftest import reference_config, reference_spec
from secbeam import model, sensing, worstcase


@pytest.fixture(scope="module")
def ref_cfg():
    return reference_config()


@pytest.fixture(scope="module")
def sensing_only(ref_cfg):
    des = worstcase.solve_sensing_only(ref_cfg, reference_spec(m=200))
    assert des.status == "optimal"
    return des


def grid_step_deg(grid):
    return np.degrees(grid[1] - grid[0])


class TestTargetScene:
    def test_validation(self):
        with pytest.raises(ValueError):
            sensing.TargetScene(angles=[0.1, 0.2], betas=[1.0], noise_power=1.0)
        with pytest.raises(ValueError):
            sensing.TargetScene(angles=[0.1], betas=[0.0], noise_power=1.0)
        with pytest.raises(ValueError):
            sensing.TargetScene(angles=[0.1], betas=[1.0], noise_power=-1.0)

    def test_snr_backsolve(self, ref_cfg):
        # |beta|^2 * N * (N q) / sigma_z^2 realizes the requested SNR
        for snr in (-10.0, 0.0, 17.0):
            scene = sensing.scene_from_snr(ref_cfg.target_angles, snr, ref_cfg, seed=5)
            got = np.abs(scene.betas) ** 2 * ref_cfg.n * ref_cfg.total_power / scene.noise_power
            assert np.allclose(got, 10.0 ** (snr / 10.0), rtol=1e-12)
        assert scene.k == 4

    def test_phases_deterministic_and_distinct(self, ref_cfg):
        a = sensing.scene_from_snr(ref_cfg.target_angles, 10.0, ref_cfg, seed=9)
        b = sensing.scene_from_snr(ref_cfg.target_angles, 10.0, ref_cfg, seed=9)
        c = sensing.scene_from_snr(ref_cfg.target_angles, 10.0, ref_cfg, seed=10)
        assert np.array_equal(a.betas, b.betas)
        assert not np.array_equal(a.betas, c.betas)


class TestGenerateTransmit:
    def test_sample_covariance_converges(self):
        n = 8
        blk = sensing.generate_transmit(np.zeros((n, n)), np.eye(n), 10**5, seed=3)
        R = blk.x @ blk.x.conj().T / blk.length
        assert np.linalg.norm(R - np.eye(n)) <= 0.05

    def test_short_block_matches_design(self, ref_cfg, sensing_only):
        T = sensing_only.T
        blk = sensing.generate_transmit(sensing_only.W, sensing_only.S, 256, seed=1)
        R = blk.x @ blk.x.conj().T / blk.length
        assert np.linalg.norm(R - T) / np.linalg.norm(T) <= 0.35

    def test_deterministic_under_seed(self):
        n = 4
        W = np.zeros((n, n))
        a = sensing.generate_transmit(W, np.eye(n), 64, seed=5)
        b = sensing.generate_transmit(W, np.eye(n), 64, seed=5)
        assert np.array_equal(a.x, b.x)

    def test_rank_one_information_stream(self):
        gen = np.random.default_rng(0)
        w = gen.standard_normal(6) + 1j * gen.standard_normal(6)
        W = np.outer(w, w.conj())
        blk = sensing.generate_transmit(W, np.zeros((6, 6)), 32, seed=2)
        # every snapshot is a scalar multiple of the information beam
        coeff = blk.x[np.argmax(np.abs(w))] / w[np.argmax(np.abs(w))]
        assert np.allclose(blk.x, np.outer(w, coeff), atol=1e-10)

    def test_rejects_bad_covariances(self):
        n = 4
        with pytest.raises(ValueError):
            sensing.generate_transmit(np.eye(n), np.zeros((n, n)), 8, seed=0)
        with pytest.raises(ValueError):
            sensing.generate_transmit(np.zeros((n, n)), -np.eye(n), 8, seed=0)


class TestSimulateEcho:
    def test_single_target_steering_input(self):
        n = 8
        th = np.deg2rad(20.0)
        a = model.steering(th, n)
        scene = sensing.TargetScene(angles=[th], betas=[1.0], noise_power=0.0)
        blk = sensing.simulate_echo(a, scene, seed=0)
        assert np.allclose(blk.y[:, 0], n * a.conj(), atol=1e-12)

    def test_zero_input_zero_output(self):
        scene = sensing.TargetScene(angles=[0.3], betas=[1.0], noise_power=0.0)
        blk = sensing.simulate_echo(np.zeros((8, 4)), scene, seed=1)
        assert np.max(np.abs(blk.y)) == 0.0

    def test_superposition_over_targets(self):
        n = 8
        gen = np.random.default_rng(7)
        x = gen.standard_normal((n, 16)) + 1j * gen.standard_normal((n, 16))
        both = sensing.TargetScene(angles=[-0.4, 0.25], betas=[0.8, 0.8], noise_power=0.0)
        one = sensing.TargetScene(angles=[-0.4], betas=[0.8], noise_power=0.0)
        two = sensing.TargetScene(angles=[0.25], betas=[0.8], noise_power=0.0)
        y = sensing.simulate_echo(x, both, seed=0).y
        y1 = sensing.simulate_echo(x, one, seed=0).y
        y2 = sensing.simulate_echo(x, two, seed=0).y
        assert np.allclose(y, y1 + y2, atol=1e-12)

    def test_linear_in_x_for_fixed_noise(self):
        n = 6
        gen = np.random.default_rng(8)
        scene = sensing.TargetScene(angles=[0.5], betas=[1.0 - 0.3j], noise_power=0.4)
        x1 = gen.standard_normal((n, 10)) + 1j * gen.standard_normal((n, 10))
        x2 = gen.standard_normal((n, 10)) + 1j * gen.standard_normal((n, 10))
        z = sensing.simulate_echo(np.zeros_like(x1), scene, seed=4).y
        y1 = sensing.simulate_echo(x1, scene, seed=4).y - z
        y2 = sensing.simulate_echo(x2, scene, seed=4).y - z
        y12 = sensing.simulate_echo(x1 + x2, scene, seed=4).y - z
        assert np.allclose(y12, y1 + y2, atol=1e-10)


class TestCaponSpectrum:
    def test_requires_received_samples(self):
        blk = sensing.SignalBlock(x=np.zeros((4, 8)))
        with pytest.raises(ValueError):
            sensing.capon_spectrum(blk)

    def test_real_finite_everywhere(self, ref_cfg, sensing_only):
        scene = sensing.scene_from_snr(ref_cfg.target_angles, 0.0, ref_cfg, seed=2)
        blk = sensing.generate_transmit(sensing_only.W, sensing_only.S, 256, seed=2)
        grid, vals = sensing.capon_spectrum(sensing.simulate_echo(blk, scene, seed=2))
        assert vals.shape == grid.shape == (1000,)
        assert np.isrealobj(vals) and np.all(np.isfinite(vals))
        assert np.all(vals >= 0)

    def test_invariant_to_real_scaling_of_y(self, ref_cfg, sensing_only):
        scene = sensing.scene_from_snr(ref_cfg.target_angles, 10.0, ref_cfg, seed=6)
        blk = sensing.generate_transmit(sensing_only.W, sensing_only.S, 256, seed=6)
        echo = sensing.simulate_echo(blk, scene, seed=6)
        _, base = sensing.capon_spectrum(echo)
        for c in (3.7, 0.02, -5.0):
            _, scaled = sensing.capon_spectrum(sensing.SignalBlock(x=echo.x, y=c * echo.y))
            assert np.max(np.abs(scaled - base)) <= 1e-9 * np.max(np.abs(base))

    def test_single_target_peak_on_grid(self, ref_cfg):
        n = ref_cfg.n
        th = np.deg2rad(20.0)
        scene = sensing.scene_from_snr([th], 20.0, ref_cfg, seed=11)
        blk = sensing.generate_transmit(np.zeros((n, n)), ref_cfg.q * np.eye(n), 256, seed=11)
        grid, vals = sensing.capon_spectrum(sensing.simulate_echo(blk, scene, seed=11))
        est = sensing.estimate_angles((grid, vals), 1)
        assert abs(np.degrees(est[0] - th)) <= grid_step_deg(grid)

    def test_four_target_scene_peaks(self, ref_cfg, sensing_only):
        scene = sensing.scene_from_snr(ref_cfg.target_angles, 20.0, ref_cfg, seed=1)
        blk = sensing.generate_transmit(sensing_only.W, sensing_only.S, 256, seed=1)
        grid, vals = sensing.capon_spectrum(sensing.simulate_echo(blk, scene, seed=1))
        est = np.sort(sensing.estimate_angles((grid, vals), 4))
        truth = np.sort(scene.angles)
        assert np.max(np.abs(np.degrees(est - truth))) <= grid_step_deg(grid)


class TestEstimateAngles:
    def test_orders_by_peak_strength(self):
        grid = np.linspace(-1.0, 1.0, 201)
        vals = np.exp(-((grid - 0.5) ** 2) / 1e-3) + 2.0 * np.exp(-((grid + 0.25) ** 2) / 1e-3)
        est = sensing.estimate_angles((grid, vals), 2)
        assert abs(est[0] + 0.25) < 0.02 and abs(est[1] - 0.5) < 0.02

    def test_pads_when_peaks_are_scarce(self):
        grid = np.linspace(-1.0, 1.0, 50)
        vals = np.linspace(0.0, 1.0, 50)  # monotone: no interior maxima
        est = sensing.estimate_angles((grid, vals), 3)
        assert len(est) == 3
        assert set(np.round(est, 6)) <= set(np.round(grid[-4:], 6))


class TestRmse:
    def test_exact_estimates(self):
        truth = np.deg2rad([-45.0, -15.0, 15.0, 45.0])
        assert sensing.rmse(truth, truth) == 0.0

    def test_uniform_offset(self):
        truth = np.deg2rad([-45.0, -15.0, 15.0, 45.0])
        est = truth + np.deg2rad(1.0)
        assert np.isclose(sensing.rmse(est, truth), 1.0, rtol=1e-9)

    def test_greedy_matching_is_order_aware(self):
        # the stronger (first) estimate claims the nearest truth first
        truth = np.array([0.0, 0.1])
        est = np.array([0.04, 0.05])
        got = sensing.rmse(est, truth)
        want = np.degrees(np.sqrt((0.04**2 + 0.05**2) / 2))
        assert np.isclose(got, want, rtol=1e-9)

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            sensing.rmse([0.1, 0.2], [0.1])


class TestTrends:
    def test_rmse_nonincreasing_in_snr(self, ref_cfg, sensing_only):
        levels = (-10.0, 0.0, 10.0, 20.0)
        means = []
        for snr in levels:
            vals = []
            for seed in range(100):
                scene = sensing.scene_from_snr(ref_cfg.target_angles, snr, ref_cfg, seed=seed)
                vals.append(sensing.estimation_rmse(sensing_only.W, sensing_only.S, scene, seed=seed))
            means.append(np.mean(vals))
        assert all(means[i + 1] <= means[i] for i in range(len(means) - 1))

    def test_common_seed_reuses_randomness(self, ref_cfg, sensing_only):
        scene = sensing.scene_from_snr(ref_cfg.target_angles, 10.0, ref_cfg, seed=42)
        a = sensing.estimation_rmse(sensing_only.W, sensing_only.S, scene, seed=42)
        b = sensing.estimation_rmse(sensing_only.W, sensing_only.S, scene, seed=42)
        assert a == b
