import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symmetra.errors import NotHermitian
from symmetra.numerics import (eigvalsh_batch, hermitian_spectrum, is_projection, is_unitary, jacobi_eigh, max_eig,
                               min_eig, project_psd, project_psd_batch, random_hermitian, random_unitary)

from conftest import I2, SX, SY, SZ

R3 = np.sqrt(3)
OCT_SECTION = 1.5 * I2 + 0.5 * (SX + SY + SZ)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_spectrum_examples(method):
    assert np.allclose(hermitian_spectrum(np.eye(3), method=method).eigenvalues, 1)
    assert np.allclose(hermitian_spectrum((I2 + SZ) / 2, method=method).eigenvalues, [0, 1])
    w = hermitian_spectrum(OCT_SECTION, method=method).eigenvalues
    assert np.allclose(w, [1.5 - R3 / 2, 1.5 + R3 / 2], atol=1e-12)


def test_extreme_eigenvalues():
    assert max_eig(np.zeros((2, 2))) == 0 and min_eig(np.zeros((2, 2))) == 0
    p = (I2 + SX) / 2
    assert max_eig(p) == pytest.approx(1) and min_eig(p) == pytest.approx(0, abs=1e-15)
    assert max_eig(OCT_SECTION) == pytest.approx(1.5 + R3 / 2, abs=1e-12)
    assert min_eig(OCT_SECTION) == pytest.approx(1.5 - R3 / 2, abs=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        max_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitian):
        hermitian_spectrum(np.array([[0, 1], [0, 0]]), method="jacobi")


def test_project_psd_examples():
    p = (I2 + SY) / 2
    assert np.allclose(project_psd(p), p, atol=1e-12)
    assert np.allclose(project_psd(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]))
    assert np.allclose(project_psd(-np.eye(3)), 0)


def test_is_projection_examples():
    assert is_projection(np.eye(4)) == (True, 4)
    assert is_projection((I2 + SX) / 2) == (True, 1)
    assert is_projection(0.5 * I2)[0] is False
    assert is_projection(np.array([[0, 1], [0, 0]]))[0] is False


def test_eigvalsh_batch_closed_form_matches_lapack(rng):
    stack = np.array([random_hermitian(2, rng) for _ in range(50)])
    assert np.allclose(eigvalsh_batch(stack), np.linalg.eigvalsh(stack), atol=1e-12)
    stack3 = np.array([random_hermitian(3, rng) for _ in range(5)])
    assert np.allclose(eigvalsh_batch(stack3), np.linalg.eigvalsh(stack3))


dims = st.integers(min_value=1, max_value=8)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_spectrum_trace_and_reconstruction(d, seed):
    m = random_hermitian(d, np.random.default_rng(seed))
    for method in ("lapack", "jacobi"):
        spec = hermitian_spectrum(m, method=method)
        assert spec.eigenvalues.sum() == pytest.approx(np.trace(m).real, abs=1e-9)
        assert spec.residual <= 1e-9


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_jacobi_agrees_with_lapack(d, seed):
    m = random_hermitian(d, np.random.default_rng(seed))
    w, _ = jacobi_eigh(m)
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_max_eig_conjugation_invariant(d, seed):
    rng = np.random.default_rng(seed)
    m, u = random_hermitian(d, rng), random_unitary(d, rng)
    assert is_unitary(u)
    assert max_eig(u @ m @ u.conj().T) == pytest.approx(max_eig(m), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(dims, seeds)
def test_project_psd_is_nearest_and_idempotent(d, seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(d, rng)
    p = project_psd(m)
    assert min_eig(p) >= -1e-10
    assert np.allclose(project_psd(p), p, atol=1e-10)
    # independent spectrum: clipping via numpy eig (non-Hermitian routine)
    w, v = np.linalg.eig(m)
    ref = (v * np.clip(w.real, 0, None)) @ np.linalg.inv(v)
    assert np.allclose(p, ref, atol=1e-8)
    # no random PSD matrix is closer
    for _ in range(5):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q = a @ a.conj().T * rng.uniform(0, 1)
        assert np.linalg.norm(m - q) >= np.linalg.norm(m - p) - 1e-9
    assert np.allclose(project_psd_batch(m[None])[0], p, atol=1e-10)
