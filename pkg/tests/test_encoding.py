"""Hermitian parametrization and cone-row builders against direct evaluation."""

import numpy as np
import pytest

from secbeam import conic, encoding, model

from conftest import reference_config, reference_spec


def random_herm(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


def random_unit(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_param_roundtrip():
    rng = np.random.default_rng(0)
    for n in (2, 3, 8):
        H = random_herm(rng, n)
        p = encoding.herm_to_params(H)
        assert p.shape == (n * n,)
        back = encoding.params_to_herm(p, n)
        np.testing.assert_allclose(back, H, atol=1e-12)


def test_basis_matches_roundtrip():
    rng = np.random.default_rng(1)
    n = 5
    p = rng.normal(size=n * n)
    H = encoding.params_to_herm(p, n)
    H_basis = np.einsum("k,kij->ij", p, encoding.herm_basis(n))
    np.testing.assert_allclose(H, H_basis, atol=1e-12)


def test_quad_form_row_general():
    rng = np.random.default_rng(2)
    n = 6
    for _ in range(20):
        a, b = random_unit(rng, n), random_unit(rng, n)
        p = rng.normal(size=n * n)
        T = encoding.params_to_herm(p, n)
        row = encoding.quad_form_row(a, b)
        np.testing.assert_allclose(row @ p, a.conj() @ T @ b, atol=1e-10)


def test_quad_form_self_is_real():
    rng = np.random.default_rng(3)
    a = random_unit(rng, 7)
    row = encoding.quad_form_row(a)
    assert np.max(np.abs(row.imag)) < 1e-14


def test_quad_form_rows_matches_single():
    rng = np.random.default_rng(4)
    n, m = 8, 11
    A = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    rows = encoding.quad_form_rows(A)
    for j in range(m):
        np.testing.assert_allclose(rows[j], np.real(encoding.quad_form_row(A[:, j])), atol=1e-12)


def test_psd_columns_match_embedding():
    rng = np.random.default_rng(5)
    n = 6
    p = rng.normal(size=n * n)
    T = encoding.params_to_herm(p, n)
    cols = encoding.herm_psd_columns(n)
    direct = encoding.embed_svec(T)[0]
    np.testing.assert_allclose(cols @ p, direct, atol=1e-12)


def test_embed_svec_isometry():
    rng = np.random.default_rng(6)
    H = random_herm(rng, 5)
    v = encoding.embed_svec(H)[0]
    # embedding doubles the squared Frobenius norm
    np.testing.assert_allclose(v @ v, 2.0 * np.sum(np.abs(H) ** 2), rtol=1e-12)


def test_lmi_columns_match_direct_block():
    rng = np.random.default_rng(7)
    n = 5
    h = random_unit(rng, n)
    p = rng.normal(size=n * n)
    V = encoding.params_to_herm(p, n)
    block = np.zeros((n + 1, n + 1), dtype=complex)
    block[:n, :n] = -V
    block[:n, n] = -V @ h
    block[n, :n] = -(V @ h).conj()
    block[n, n] = -np.real(h.conj() @ V @ h)
    cols = encoding.lmi_columns_response(h)
    np.testing.assert_allclose(cols @ p, encoding.embed_svec(block)[0], atol=1e-10)


def test_lmi_lambda_and_constant_columns():
    n, eps = 4, 0.3
    lam_col = encoding.lmi_lambda_column(n, eps)
    M = np.diag(np.concatenate([np.ones(n), [-(eps**2)]]))
    np.testing.assert_allclose(lam_col, encoding.embed_svec(M.astype(complex))[0], atol=1e-14)
    const = encoding.lmi_constant(n, 2.5)
    C = np.zeros((n + 1, n + 1), dtype=complex)
    C[n, n] = 2.5
    np.testing.assert_allclose(const, encoding.embed_svec(C)[0], atol=1e-14)


def test_congruence_response_matches_direct():
    rng = np.random.default_rng(8)
    n = 5
    R = random_herm(rng, n)
    p = rng.normal(size=n * n)
    V = encoding.params_to_herm(p, n)
    mats, vec_real, trace_row = encoding.congruence_response(R)
    direct = R @ V @ R.conj().T
    combo = np.einsum("k,kij->ij", p, mats)
    np.testing.assert_allclose(combo, direct, atol=1e-10)
    flat = vec_real @ p
    np.testing.assert_allclose(flat[: n * n], direct.ravel().real, atol=1e-10)
    np.testing.assert_allclose(flat[n * n :], direct.ravel().imag, atol=1e-10)
    np.testing.assert_allclose(trace_row @ p, np.real(np.trace(direct)), atol=1e-10)


def test_objective_rows_reproduce_matching_error():
    """The SOC residual norm squared must equal the sensing objective."""
    cfg = reference_config()
    spec = reference_spec(m=40)
    rng = np.random.default_rng(9)
    for _ in range(5):
        W = random_herm(rng, cfg.n)
        S = random_herm(rng, cfg.n)
        eta = float(rng.normal())
        rows, eta_col, _ = encoding.objective_rows(cfg, spec)
        p = encoding.herm_to_params(W + S)
        r = eta * eta_col - rows @ p
        D = model.sensing_objective(W, S, eta, cfg, spec)
        np.testing.assert_allclose(r @ r, D, rtol=1e-9, atol=1e-12)


def test_objective_rows_need_two_targets_for_cross_term():
    one_target = reference_config(target_angles_deg=(-15.0,), k_eve=1)
    spec = reference_spec(m=20)
    with pytest.raises(ValueError):
        encoding.objective_rows(one_target, spec)


def test_varmap_and_rowblocks_build():
    vm = encoding.VarMap([("a", 3), ("b", 2)])
    assert vm.n == 5
    assert vm["b"] == slice(3, 5)
    rb = encoding.RowBlocks(5)
    rb.add("nonneg", np.eye(5)[:2], np.zeros(2))
    rb.add("zero", -np.eye(5)[4:], np.ones(1))
    rb.add("soc", np.eye(5)[1:4], np.zeros(3))
    prob = rb.build(np.arange(5.0))
    # canonical order: zero rows first, then nonneg, then soc
    assert prob.cones == [("zero", 1), ("nonneg", 2), ("soc", 3)]
    assert prob.shape == (6, 5)
    np.testing.assert_allclose(prob.b, [1, 0, 0, 0, 0, 0])
