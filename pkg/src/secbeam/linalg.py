"""Hermitian eigen-tools shared by the cone solver and the beamforming pipelines.

Everything downstream (PSD projections, matrix square roots, complex LMI
embeddings) funnels through the routines here so that tolerance conventions
live in one place.
"""

import numpy as np
from dataclasses import dataclass

# Relative symmetry slack accepted by hermitian_eig.
HERMITIAN_TOL = 1e-10
# Negative eigenvalues above this magnitude are treated as numerical zero.
CLIP_ABS = 1e-9
# Relative threshold past which an input is considered materially indefinite.
INDEFINITE_REL = 1e-6


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order, eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_part(A):
    """Return (A + A^H)/2, the Hermitian symmetrization of A."""
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


def is_hermitian(H, tol=HERMITIAN_TOL):
    """True if H equals its conjugate transpose within tol*(1 + max|H|)."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    scale = 1.0 + np.max(np.abs(H)) if H.size else 1.0
    return np.max(np.abs(H - H.conj().T)) <= tol * scale


def hermitian_eig(H):
    """Eigendecomposition of a Hermitian matrix.

    Validates the input (finite entries, Hermitian within HERMITIAN_TOL) and
    returns an EigenDecomposition with ascending real eigenvalues and
    orthonormal eigenvector columns.
    """
    H = np.asarray(H)
    if not np.all(np.isfinite(H)):
        raise ValueError("hermitian_eig: input has non-finite entries")
    if not is_hermitian(H):
        raise ValueError("hermitian_eig: input is not Hermitian within tolerance")
    w, V = np.linalg.eigh(H)
    return EigenDecomposition(eigenvalues=w, eigenvectors=V)


def spectral_norm_hermitian(H):
    """max |eigenvalue| of a Hermitian matrix."""
    w = np.linalg.eigvalsh(hermitian_part(np.asarray(H)))
    return float(np.max(np.abs(w))) if w.size else 0.0


def matrix_sqrt_psd(H):
    """Hermitian PSD square root of a (numerically) PSD matrix.

    Eigenvalues in [-CLIP_ABS, 0) are clipped to zero.  A minimum eigenvalue
    below -INDEFINITE_REL * ||H||_2 means the input is materially indefinite
    and raises ValueError.
    """
    dec = hermitian_eig(H)
    w, V = dec.eigenvalues, dec.eigenvectors
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -max(INDEFINITE_REL * scale, CLIP_ABS):
        raise ValueError(
            "matrix_sqrt_psd: input is materially indefinite "
            f"(min eigenvalue {w[0]:.3e}, scale {scale:.3e})"
        )
    w = np.clip(w, 0.0, None)
    root = (V * np.sqrt(w)) @ V.conj().T
    return hermitian_part(root)


def psd_project(H, tol_rel=INDEFINITE_REL):
    """Clip negative eigenvalues of a Hermitian matrix to zero.

    Used to clean near-feasible solver output before rank-one constructions.
    Raises if the input is more than tol_rel relative indefinite, mirroring
    matrix_sqrt_psd.
    """
    dec = hermitian_eig(H)
    w, V = dec.eigenvalues, dec.eigenvectors
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -max(tol_rel * scale, CLIP_ABS):
        raise ValueError(
            f"psd_project: input too indefinite (min eigenvalue {w[0]:.3e})"
        )
    if w.size and w[0] >= 0.0:
        return hermitian_part(np.asarray(H))
    w = np.clip(w, 0.0, None)
    return hermitian_part((V * w) @ V.conj().T)


def sym_eig_clip_batch(mats):
    """Project a stack of real symmetric matrices onto the PSD cone.

    mats has shape (k, n, n); the projection is eigenvalue clipping at zero.
    This is the hot path of the cone solver, hence the batched form.
    """
    w, V = np.linalg.eigh(mats)
    w = np.clip(w, 0.0, None)
    return np.einsum("kij,kj,klj->kil", V, w, V)


def complex_to_real_embed(H):
    """Real embedding [[Re H, -Im H], [Im H, Re H]] of a complex matrix.

    For Hermitian H the embedding is symmetric, has each eigenvalue of H with
    doubled multiplicity, and is PSD exactly when H is.
    """
    H = np.asarray(H)
    re, im = H.real, H.imag
    top = np.concatenate([re, -im], axis=1)
    bot = np.concatenate([im, re], axis=1)
    return np.concatenate([top, bot], axis=0)
