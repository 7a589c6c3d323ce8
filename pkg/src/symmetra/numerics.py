"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Every public function validates
Hermiticity against ``tol`` (default :data:`HERMITIAN_TOL`) and raises
:class:`~symmetra.errors.NotHermitian` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    residual: float
    vectors: np.ndarray | None = None


def as_cmat(m) -> np.ndarray:
    """Return ``m`` as a square complex matrix, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _check_hermitian(m, tol):
    a = as_cmat(m)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"max |m - m^dagger| = {defect:.3e} exceeds {tol:.1e}")
    return 0.5 * (a + a.conj().T)


def jacobi_eigh(m, tol: float = 1e-13, max_sweeps: int = 60):
    """Cyclic complex Jacobi rotations; returns ``(eigenvalues, vectors)`` ascending."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.max(np.abs(a)), 1.0) if n else 1.0
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                h = a[p, q]
                r = abs(h)
                if r <= 1e-300:
                    continue
                phase = h / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) block
                jpp, jpq = c, s
                jqp, jqq = -s * np.conj(phase), c * np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = col_p * jpp + col_q * jqp
                a[:, q] = col_p * jpq + col_q * jqq
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = np.conj(jpp) * row_p + np.conj(jqp) * row_q
                a[q, :] = np.conj(jpq) * row_p + np.conj(jqq) * row_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp * jpp + vq * jqp
                v[:, q] = vp * jpq + vq * jqq
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_spectrum(m, tol: float = HERMITIAN_TOL, method: str = "lapack") -> Spectrum:
    """Eigenvalues (ascending) of a Hermitian matrix with a reconstruction residual.

    ``method`` is ``"lapack"`` (numpy ``eigh``) or ``"jacobi"``.
    """
    a = _check_hermitian(m, tol)
    n = a.shape[0]
    if method == "jacobi":
        w, v = jacobi_eigh(a)
    elif method == "lapack":
        try:
            w, v = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise NoConvergence(str(exc)) from exc
    else:
        raise ValueError(f"unknown method {method!r}")
    recon = (v * w) @ v.conj().T
    residual = float(np.max(np.abs(recon - a))) if n else 0.0
    return Spectrum(eigenvalues=np.asarray(w, dtype=float), residual=residual, vectors=v)


def max_eig(m, tol: float = HERMITIAN_TOL) -> float:
    a = _check_hermitian(m, tol)
    return float(np.linalg.eigvalsh(a)[-1])


def min_eig(m, tol: float = HERMITIAN_TOL) -> float:
    a = _check_hermitian(m, tol)
    return float(np.linalg.eigvalsh(a)[0])


def project_psd(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix (eigenvalue clipping)."""
    a = _check_hermitian(m, tol)
    w, v = np.linalg.eigh(a)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def project_psd_batch(stack: np.ndarray) -> np.ndarray:
    """:func:`project_psd` over a ``(n, d, d)`` stack, without validation."""
    w, v = np.linalg.eigh(stack)
    w = np.clip(w, 0.0, None)
    out = np.einsum("nij,nj,nkj->nik", v, w, v.conj())
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))


def is_projection(m, tol: float = 1e-9) -> tuple[bool, int]:
    """Return ``(is_projector, rank)`` where rank is the rounded trace."""
    a = as_cmat(m)
    rank = int(round(float(np.trace(a).real)))
    if hermiticity_defect(a) > tol:
        return False, rank
    if np.max(np.abs(a @ a - a)) > tol:
        return False, rank
    return True, rank


def is_unitary(m, tol: float = 1e-9) -> bool:
    a = as_cmat(m)
    return bool(np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0]))) <= tol)


def eigvalsh_batch(stack: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a stack of Hermitian matrices, closed form for d=2."""
    if stack.shape[-1] == 2:
        a = stack[..., 0, 0].real
        b = stack[..., 1, 1].real
        c = np.abs(stack[..., 0, 1])
        mean = 0.5 * (a + b)
        rad = np.sqrt(0.25 * (a - b) ** 2 + c * c)
        return np.stack([mean - rad, mean + rad], axis=-1)
    return np.linalg.eigvalsh(stack)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (z + z.conj().T)
