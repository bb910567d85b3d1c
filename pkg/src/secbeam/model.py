"""Array, channel, and secrecy model for the joint information/sensing design.

Conventions: angles are radians internally (degrees only at the CLI
boundary), powers are Watts, rates are bps/Hz.  The transmit covariance is
T = W + S with W the (rank <= 1) information part and S the sensing part,
under per-antenna power diag(T) = q.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg


def steering(theta, n, spacing_ratio=0.5):
    """Steering vector(s) of a uniform linear array.

    theta may be a scalar or 1D array of radians; returns shape (n,) or
    (n, len(theta)).  Element m carries phase 2*pi*spacing_ratio*m*sin(theta).
    """
    theta = np.asarray(theta, dtype=float)
    m = np.arange(n)
    phase = 2.0 * np.pi * spacing_ratio * np.outer(m, np.sin(np.atleast_1d(theta)))
    A = np.exp(1j * phase)
    return A[:, 0] if theta.ndim == 0 else A


def desired_beampattern(theta, target_angles, delta_theta):
    """Ideal 0/1 pattern: 1 inside any half-open beam |theta - t_k| < delta/2."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    targets = np.asarray(target_angles, dtype=float)
    hit = np.abs(theta[:, None] - targets[None, :]) < 0.5 * delta_theta
    return hit.any(axis=1).astype(float)


def beampattern_gain(T, theta, spacing_ratio=0.5):
    """Transmit power a(theta)^H T a(theta) toward each angle (real)."""
    T = np.asarray(T)
    A = steering(np.atleast_1d(theta), T.shape[0], spacing_ratio)
    return np.real(np.einsum("im,ij,jm->m", A.conj(), T, A))


@dataclass(frozen=True)
class SystemConfig:
    """Base-station geometry, channels, and noise levels.

    target_angles lists all K sensing targets; the first k_eve of them are
    the untrusted ones whose estimated channels are h_hat (k_eve x n).
    """

    n: int
    q: float
    theta_cu: float
    target_angles: np.ndarray
    k_eve: int
    g: np.ndarray
    h_hat: np.ndarray
    sigma0_sq: float
    sigma_eve_sq: np.ndarray
    spacing_ratio: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "target_angles", np.asarray(self.target_angles, dtype=float))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=complex))
        object.__setattr__(self, "h_hat", np.asarray(self.h_hat, dtype=complex).reshape(self.k_eve, self.n))
        object.__setattr__(self, "sigma_eve_sq", np.asarray(self.sigma_eve_sq, dtype=float).reshape(self.k_eve))
        if self.n < 2:
            raise ValueError("need at least two antennas")
        if self.q <= 0:
            raise ValueError("per-antenna power must be positive")
        if not (0 <= self.k_eve <= len(self.target_angles)):
            raise ValueError("k_eve must lie in [0, K]")
        if self.sigma0_sq <= 0 or (self.k_eve and np.any(self.sigma_eve_sq <= 0)):
            raise ValueError("noise powers must be positive")
        angles = np.concatenate([[self.theta_cu], self.target_angles])
        if np.any(np.abs(angles) > np.pi / 2 + 1e-12):
            raise ValueError("angles must lie in [-pi/2, pi/2]")
        if self.g.shape != (self.n,):
            raise ValueError("g must have one entry per antenna")
        if self.h_hat.shape != (self.k_eve, self.n):
            raise ValueError("h_hat must be k_eve x n")

    @property
    def total_power(self):
        return self.n * self.q

    @property
    def k_targets(self):
        return len(self.target_angles)


@dataclass(frozen=True)
class SensingSpec:
    """Beampattern-matching setup: sample grid, beam width, cross-term weight."""

    sample_angles: np.ndarray
    delta_theta: float
    omega_c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sample_angles", np.asarray(self.sample_angles, dtype=float))
        if self.sample_angles.ndim != 1 or len(self.sample_angles) < 1:
            raise ValueError("sample_angles must be a nonempty 1D grid")
        if self.delta_theta <= 0:
            raise ValueError("delta_theta must be positive")
        if self.omega_c < 0:
            raise ValueError("omega_c must be nonnegative")

    @classmethod
    def uniform(cls, m, delta_theta, omega_c=1.0):
        """M angles uniform over [-pi/2, pi/2] inclusive."""
        return cls(np.linspace(-np.pi / 2, np.pi / 2, m), delta_theta, omega_c)

    @property
    def m(self):
        return len(self.sample_angles)


@dataclass(frozen=True)
class ErrorModel:
    """Eavesdropper CSI uncertainty: perfect, bounded ball, or Gaussian."""

    variant: str
    epsilons: np.ndarray = None
    cov: np.ndarray = None

    def __post_init__(self):
        if self.variant not in ("perfect", "bounded", "gaussian"):
            raise ValueError(f"unknown error model {self.variant!r}")
        if self.variant == "bounded":
            eps = np.asarray(self.epsilons, dtype=float)
            if np.any(eps < 0):
                raise ValueError("error radii must be nonnegative")
            object.__setattr__(self, "epsilons", eps)
        if self.variant == "gaussian":
            if self.cov is None:
                raise ValueError("gaussian error model needs covariance matrices")
            object.__setattr__(self, "cov", np.asarray(self.cov, dtype=complex))


@dataclass
class Design:
    """A transmit design: covariance split, pattern scale, and search state."""

    W: np.ndarray = None
    S: np.ndarray = None
    eta: float = np.nan
    gamma: float = np.nan
    rank_one: bool = False
    status: str = "optimal"
    objective: float = np.nan
    info: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.W + self.S


def sensing_objective(W, S, eta, config, spec):
    """Beampattern matching error plus weighted cross-correlation.

    D = (1/M) sum_m |eta*Phat(theta_m) - a^H T a|^2
        + (2 omega_c / (K^2 - K)) sum_{p<q} |a_p^H T a_q|^2
    """
    T = np.asarray(W) + np.asarray(S)
    k = config.k_targets
    if spec.omega_c > 0 and k < 2:
        raise ValueError("cross-correlation term needs at least two targets")
    gains = beampattern_gain(T, spec.sample_angles, config.spacing_ratio)
    phat = desired_beampattern(spec.sample_angles, config.target_angles, spec.delta_theta)
    D = np.mean(np.abs(eta * phat - gains) ** 2)
    if spec.omega_c > 0:
        A = steering(config.target_angles, config.n, config.spacing_ratio)
        cross = A.conj().T @ T @ A
        iu = np.triu_indices(k, 1)
        D += (2.0 * spec.omega_c / (k * k - k)) * np.sum(np.abs(cross[iu]) ** 2)
    return float(D)


def sinr_cu(W, S, g, sigma0_sq):
    """Information SINR at the communication user."""
    num = np.real(np.vdot(g, W @ g))
    den = np.real(np.vdot(g, S @ g)) + sigma0_sq
    return num / den

def sinr_eve(W, S, h, sigma_sq):
    """Information SINR leaked to one eavesdropper with channel h."""
    num = np.real(np.vdot(h, W @ h))
    den = np.real(np.vdot(h, S @ h)) + sigma_sq
    return num / den


def secrecy_rate(W, S, g, h_list, sigma0_sq, sigma_eve_sq):
    """Worst-eavesdropper secrecy rate, clamped at zero (bps/Hz)."""
    r0 = np.log2(1.0 + sinr_cu(W, S, g, sigma0_sq))
    h_list = np.atleast_2d(np.asarray(h_list))
    sig = np.broadcast_to(np.asarray(sigma_eve_sq, dtype=float).ravel(), (h_list.shape[0],))
    worst = 0.0
    for h, s2 in zip(h_list, sig):
        worst = max(worst, np.log2(1.0 + sinr_eve(W, S, h, s2)))
    return max(r0 - worst, 0.0)


def phi(gamma, r0):
    """Eavesdropping SINR cap that keeps rate >= r0 at CU SINR gamma."""
    return 2.0 ** (-r0) * (1.0 + gamma) - 1.0


def gamma_interval(r0, config):
    """Search interval for the CU SINR: [2^r0 - 1, NQ ||g||^2 / sigma0^2]."""
    lo = 2.0**r0 - 1.0
    hi = config.total_power * float(np.linalg.norm(config.g) ** 2) / config.sigma0_sq
    if hi < lo:
        raise ValueError("rate target exceeds the maximum achievable CU SINR")
    return lo, hi


def rank_one_construct(W_tilde, S_tilde, g, psd_tol=1e-7):
    """Extract the rank-one information part that preserves all guarantees.

    W* = W g g^H W / (g^H W g),  S* = W + S - W*.  The inputs may be PSD only
    up to -psd_tol (solver output); they are clipped first.  Raises when the
    CU direction carries no signal power (g^H W g ~ 0).
    """
    W = _clip_psd(W_tilde, psd_tol, "W")
    S = _clip_psd(S_tilde, psd_tol, "S")
    g = np.asarray(g, dtype=complex)
    gwg = float(np.real(np.vdot(g, W @ g)))
    if gwg <= 1e-12:
        raise ValueError("rank-one construction undefined: CU direction carries no signal power")
    w = W @ g / np.sqrt(gwg)
    W_star = np.outer(w, w.conj())
    S_star = (W + S) - W_star
    return W_star, S_star


def _clip_psd(H, tol, name):
    H = linalg.hermitian_part(np.asarray(H, dtype=complex))
    w, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    if w[0] < -tol * scale:
        raise ValueError(f"{name} is not PSD within tolerance (min eig {w[0]:.3e})")
    if w[0] >= 0.0:
        return H
    return linalg.hermitian_part((V * np.clip(w, 0.0, None)) @ V.conj().T)


def repair_diagonal(W, S, q):
    """Symmetric diagonal rescale so diag(W+S) = q exactly.

    First-order solver output meets the per-antenna rows only to its
    tolerance; the congruence D (W, S) D with D = sqrt(q / diag(T)) restores
    the power constraint while preserving PSD-ness and rank.
    """
    T = W + S
    d = np.sqrt(q / np.real(np.diag(T)))
    D = np.outer(d, d)
    return W * D, S * D


def is_rank_one(W, tol=1e-6):
    """True if the second-largest eigenvalue is <= tol * largest."""
    w = np.linalg.eigvalsh(linalg.hermitian_part(np.asarray(W)))
    top = max(w[-1], 0.0)
    second = max(w[-2], 0.0) if len(w) > 1 else 0.0
    return second <= tol * top if top > 0 else True
