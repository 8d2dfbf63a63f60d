"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays. A *Hermitian* matrix is one that has been
passed through :func:`hermitian`, which symmetrizes it exactly so that
``a == a.conj().T`` holds bit for bit and the diagonal is real.

Tensor ordering convention: ``kron(a, b)`` has row-block index given by ``a``,
so an ``(n*k) x (n*k)`` matrix ``M`` is read as ``sum_ij E_ij (x) B_ij`` with
``B_ij = M[i*k:(i+1)*k, j*k:(j+1)*k]``.
"""
from __future__ import annotations

import numpy as np

PSD_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when array shapes are incompatible with an operation."""


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-d complex array, checking that every entry is finite."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitian(a) -> np.ndarray:
    """Symmetrize ``a`` to ``(a + a*)/2``."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"Hermitian matrix must be square, got {m.shape}")
    h = 0.5 * (m + m.conj().T)
    # make the two triangles exact mirrors of each other
    upper = np.triu(h, 1)
    h = upper + upper.conj().T + np.diag(h.diagonal().real)
    return h


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing ``tr(b* a) = sum_ij a_ij conj(b_ij)``."""
    a, b = np.asarray(a), np.asarray(b)
    _same_shape(a, b)
    return complex(np.vdot(b, a))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def schur_product(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    _same_shape(a, b)
    return a * b


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    Raises ``numpy.linalg.LinAlgError`` if LAPACK fails to converge.
    """
    h = hermitian(a)
    if np.all(h.imag == 0):
        w, v = np.linalg.eigh(h.real)
        return w, v.astype(complex)
    return np.linalg.eigh(h)


def min_eigenvalue(a) -> float:
    h = hermitian(a)
    if np.all(h.imag == 0):
        return float(np.linalg.eigvalsh(h.real)[0])
    return float(np.linalg.eigvalsh(h)[0])


def is_psd(a, tol: float = PSD_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return min_eigenvalue(a) >= -tol


def psd_sqrt_factor(a) -> np.ndarray:
    """Return ``S`` with ``S* S = a_+`` where ``a_+`` clips negative eigenvalues."""
    w, v = eig_hermitian(a)
    w = np.clip(w, 0.0, None)
    return (np.sqrt(w)[:, None] * v.conj().T)


def _blocks(m, n: int, k: int) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape != (n * k, n * k):
        raise DimensionError(f"matrix of shape {m.shape} does not factor as {n}*{k}")
    # result[i, a, j, b] = m[i*k + a, j*k + b]
    return m.reshape(n, k, n, k)


def partial_trace_left(m, n: int, k: int) -> np.ndarray:
    """Trace out the first (size ``n``) factor: ``sum_i B_ii``."""
    return np.einsum("iaib->ab", _blocks(m, n, k))


def partial_trace_right(m, n: int, k: int) -> np.ndarray:
    """Trace out the second (size ``k``) factor: ``sum_ij tr(B_ij) E_ij``."""
    return np.einsum("iaja->ij", _blocks(m, n, k))


def matrix_unit(n: int, i: int, j: int, dtype=float) -> np.ndarray:
    e = np.zeros((n, n), dtype=dtype)
    e[i, j] = 1
    return e


def ones(n: int) -> np.ndarray:
    return np.ones((n, n))
