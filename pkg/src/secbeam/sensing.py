"""Echo-level sensing simulation and Capon angle estimation.

Transmit blocks follow x(n) = w0 s0(n) + S^{1/2} u(n).  Echoes superpose
point-target returns beta_k a^c(theta_k) a^H(theta_k) x(n) plus white noise,
and target angles are read off the Capon spatial spectrum formed from the
sample correlation matrices of the block.

Convention (recorded because the literature leaves it open): all targets
share a common round-trip magnitude |beta| with i.i.d. uniform phases, and
the received sensing SNR is |beta|^2 * N * (N q) / sigma_z^2, from which
|beta| is back-solved when a scene is built for a requested SNR.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import linalg, model, rng

RANK_ONE_TOL = 1e-6


@dataclass(frozen=True)
class TargetScene:
    """Point targets: angles (rad), complex round-trip gains, receiver noise (Watt)."""

    angles: np.ndarray
    betas: np.ndarray
    noise_power: float

    def __post_init__(self):
        object.__setattr__(self, "angles", np.atleast_1d(np.asarray(self.angles, dtype=float)))
        object.__setattr__(self, "betas", np.atleast_1d(np.asarray(self.betas, dtype=complex)))
        if self.angles.shape != self.betas.shape:
            raise ValueError("need one round-trip coefficient per target")
        if not (np.all(np.isfinite(self.angles)) and np.all(np.isfinite(self.betas))):
            raise ValueError("scene entries must be finite")
        if np.any(np.abs(self.betas) == 0.0):
            raise ValueError("round-trip coefficients must be nonzero")
        if not (np.isfinite(self.noise_power) and self.noise_power >= 0):
            raise ValueError("noise power must be nonnegative")

    @property
    def k(self):
        return len(self.angles)


def scene_from_snr(angles, snr_db, config, seed):
    """Scene whose common |beta| realizes the requested received sensing SNR.

    Unit receiver noise power; |beta|^2 = 10^(snr/10) / (N * N q).  Phases
    are drawn i.i.d. uniform from the seed so trials differ only by seed.
    """
    n = config.n
    mag = np.sqrt(10.0 ** (snr_db / 10.0) / (n * config.total_power))
    gen = rng.stream(seed, "target-phases")
    phases = gen.uniform(0.0, 2.0 * np.pi, size=len(np.atleast_1d(angles)))
    return TargetScene(angles=angles, betas=mag * np.exp(1j * phases), noise_power=1.0)


@dataclass(frozen=True)
class SignalBlock:
    """A block of L transmit snapshots, optionally with the received echoes."""

    x: np.ndarray
    y: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex))
        if self.x.ndim != 2:
            raise ValueError("x must be antennas x symbols")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("transmit samples must be finite")
        if self.y is not None:
            object.__setattr__(self, "y", np.asarray(self.y, dtype=complex))
            if self.y.shape != self.x.shape:
                raise ValueError("y must match x in shape")

    @property
    def length(self):
        return self.x.shape[1]


def generate_transmit(W, S, length, seed):
    """Draw L transmit snapshots realizing the covariance split W + S.

    W must be rank one within tolerance (its principal component scaled by
    sqrt of the top eigenvalue carries the information symbols); S must be
    PSD and feeds the sensing stream through its square root.
    """
    W = np.asarray(W, dtype=complex)
    S = np.asarray(S, dtype=complex)
    n = W.shape[0]
    if not model.is_rank_one(W, RANK_ONE_TOL):
        raise ValueError("information covariance is not rank one within tolerance")
    dec = linalg.hermitian_eig(linalg.hermitian_part(W))
    lam = max(dec.eigenvalues[-1], 0.0)
    w0 = np.sqrt(lam) * dec.eigenvectors[:, -1]
    root = linalg.matrix_sqrt_psd(S)
    gen = rng.stream(seed, "transmit")
    s0 = rng.crandn(gen, length)
    u = rng.crandn(gen, n, length)
    return SignalBlock(x=np.outer(w0, s0) + root @ u)


def simulate_echo(block, scene, seed, spacing_ratio=0.5):
    """Received echoes for a transmit block under a point-target scene.

    y(n) = sum_k beta_k a^c(theta_k) a^H(theta_k) x(n) + z(n) with z white
    complex Gaussian of the scene's noise power.  Accepts a SignalBlock or a
    raw antennas x symbols array; returns a block holding both x and y.
    """
    x = block.x if isinstance(block, SignalBlock) else np.asarray(block, dtype=complex)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    A = model.steering(scene.angles, n, spacing_ratio)
    H = (A.conj() * scene.betas[None, :]) @ A.conj().T
    gen = rng.stream(seed, "echo-noise")
    z = np.sqrt(scene.noise_power) * rng.crandn(gen, *x.shape)
    return SignalBlock(x=x, y=H @ x + z)


def capon_spectrum(block, grid_size=1000, spacing_ratio=0.5):
    """Capon spatial spectrum of an echo block over a uniform angle grid.

    Returns (angles, values): angles are grid_size points spanning
    [-pi/2, pi/2] and values are
    |b^H R_yy^-1 R_yx a|^2 / ((b^H R_yy^-1 b) (a^T R_xx a^c))
    with the sample correlation matrices of the block, a = a(theta) the
    transmit steering vector, and b = a^c(theta) the receive response of a
    monostatic echo (the round trip conjugates the steering phase, so the
    whitened receive beamformer scans the conjugate manifold; scanning a
    itself would mirror the spectrum about broadside).  R_yy is ridged by
    1e-10 * trace/N, which keeps the spectrum exactly invariant to real
    scalings of y.
    """
    if block.y is None:
        raise ValueError("block carries no received samples")
    x, y = block.x, block.y
    n, length = x.shape
    R_xx = x @ x.conj().T / length
    R_yy = y @ y.conj().T / length
    R_yx = y @ x.conj().T / length
    ridge = 1e-10 * np.real(np.trace(R_yy)) / n
    R_yy = R_yy + ridge * np.eye(n)

    angles = np.linspace(-np.pi / 2, np.pi / 2, grid_size)
    A = model.steering(angles, n, spacing_ratio)
    B = A.conj()
    Ri_B = np.linalg.solve(R_yy, B)
    num = np.abs(np.einsum("ig,ig->g", Ri_B.conj(), R_yx @ A)) ** 2
    den_y = np.real(np.einsum("ig,ig->g", B.conj(), Ri_B))
    den_x = np.real(np.einsum("ig,ij,jg->g", A, R_xx, A.conj()))
    return angles, num / (den_y * den_x)


def estimate_angles(spectrum, k):
    """The k strongest spectral peaks, strongest first (radians).

    spectrum is the (angles, values) pair from capon_spectrum.  Local maxima
    are used first; if fewer than k exist, the largest remaining grid values
    fill out the list.
    """
    angles, values = spectrum
    peaks, _ = scipy.signal.find_peaks(values)
    order = peaks[np.argsort(values[peaks])[::-1]]
    picked = list(order[:k])
    if len(picked) < k:
        for idx in np.argsort(values)[::-1]:
            if len(picked) == k:
                break
            if idx not in picked:
                picked.append(idx)
    return angles[np.asarray(picked, dtype=int)]


def rmse(estimates, truths):
    """Root mean square angle error in degrees.

    Estimates are taken strongest first (the order estimate_angles returns)
    and each is greedily matched to the nearest unclaimed true angle, since
    the error formula presumes a pairing it does not specify.
    """
    est = np.atleast_1d(np.asarray(estimates, dtype=float))
    truth = np.atleast_1d(np.asarray(truths, dtype=float))
    if est.shape != truth.shape:
        raise ValueError("need as many estimates as true angles")
    unclaimed = list(range(len(truth)))
    sq = 0.0
    for e in est:
        j = min(unclaimed, key=lambda j: abs(e - truth[j]))
        unclaimed.remove(j)
        sq += (e - truth[j]) ** 2
    return float(np.degrees(np.sqrt(sq / len(truth))))


def estimation_rmse(W, S, scene, seed, length=256, grid_size=1000, spacing_ratio=0.5):
    """One Monte-Carlo trial: transmit under (W, S), estimate, score.

    The same seed reuses the same symbol and noise draws, so designs and SNR
    levels compared under a common seed see common random numbers.
    """
    block = generate_transmit(W, S, length, seed)
    echo = simulate_echo(block, scene, seed, spacing_ratio)
    est = estimate_angles(capon_spectrum(echo, grid_size, spacing_ratio), scene.k)
    return rmse(est, scene.angles)
