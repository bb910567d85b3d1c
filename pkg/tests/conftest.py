"""Shared scenario builders for the test suite.

The reference setup: 8-antenna half-wavelength ULA, per-antenna power 1/8 W
(1 W total), -50 dBm noise everywhere, four targets at +-15/+-45 deg of which
the two at +-15 deg are untrusted, CU channel 70 dB below unit gain, and
eavesdropper channels with per-element power 1e-3.
"""

import numpy as np
import pytest

from secbeam import model


def reference_config(
    theta_cu_deg=0.0,
    n=8,
    q=1.0 / 8.0,
    target_angles_deg=(-15.0, 15.0, -45.0, 45.0),
    k_eve=2,
    cu_gain=1e-7,
    eve_gain=1e-3,
    noise=1e-8,
    eve_amp_scale=1.0,
):
    theta_cu = np.deg2rad(theta_cu_deg)
    targets = np.deg2rad(np.asarray(target_angles_deg, dtype=float))
    g = np.sqrt(cu_gain) * model.steering(theta_cu, n)
    h_hat = np.stack(
        [eve_amp_scale * np.sqrt(eve_gain) * model.steering(t, n) for t in targets[:k_eve]]
    ) if k_eve else np.zeros((0, n), dtype=complex)
    return model.SystemConfig(
        n=n,
        q=q,
        theta_cu=theta_cu,
        target_angles=targets,
        k_eve=k_eve,
        g=g,
        h_hat=h_hat,
        sigma0_sq=noise,
        sigma_eve_sq=np.full(k_eve, noise),
    )


def reference_spec(m=500, delta_theta_deg=10.0, omega_c=1.0):
    return model.SensingSpec.uniform(m, np.deg2rad(delta_theta_deg), omega_c)


def random_psd_pair(rng, n, scale=1.0):
    """A random PSD (W, S) pair with diag(W+S) normalized to scale."""
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    W = A @ A.conj().T
    S = B @ B.conj().T
    d = np.real(np.diag(W + S))
    W *= scale / np.max(d)
    S *= scale / np.max(d)
    return W, S


@pytest.fixture
def ref_config():
    return reference_config()


@pytest.fixture
def ref_spec():
    return reference_spec()
