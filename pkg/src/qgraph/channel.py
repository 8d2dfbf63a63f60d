"""Linear maps on M_n stored by their Choi matrices.

``choi = sum_ij E_ij (x) B_ij`` with ``B_ij = map(E_ij)``, the first tensor
factor indexing row blocks. Hermiticity-preserving maps have a Hermitian Choi
matrix; general linear maps are allowed and simply carry a non-Hermitian one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import (PSD_TOL, DimensionError, as_matrix, min_eigenvalue, partial_trace_left,
                     partial_trace_right)


@dataclass(frozen=True, eq=False)
class ChannelMap:
    n: int
    choi: np.ndarray

    def __post_init__(self):
        c = as_matrix(self.choi)
        if c.shape != (self.n * self.n, self.n * self.n):
            raise DimensionError(f"Choi matrix of shape {c.shape} does not match n={self.n}")
        c.setflags(write=False)
        object.__setattr__(self, "choi", c)

    # construction -----------------------------------------------------------------

    @classmethod
    def from_choi(cls, choi) -> "ChannelMap":
        c = as_matrix(choi)
        n = int(round(np.sqrt(c.shape[0])))
        if n * n != c.shape[0]:
            raise DimensionError(f"Choi dimension {c.shape[0]} is not a perfect square")
        return cls(n, c)

    @classmethod
    def from_function(cls, n: int, f: Callable[[np.ndarray], np.ndarray]) -> "ChannelMap":
        blocks = np.zeros((n, n, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1
                blocks[i, :, j, :] = f(e)
        return cls(n, blocks.reshape(n * n, n * n))

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "ChannelMap":
        ks = [as_matrix(k) for k in kraus]
        n = ks[0].shape[0]
        if any(k.shape != (n, n) for k in ks):
            raise DimensionError("Kraus operators must all be n x n")
        # B_ij = sum_k K e_i e_j^T K^*  ->  choi[i,a,j,b] = sum_k K[a,i] conj(K[b,j])
        st = np.stack(ks)
        blocks = np.einsum("kai,kbj->iajb", st, st.conj())
        return cls(n, blocks.reshape(n * n, n * n))

    @classmethod
    def identity(cls, n: int) -> "ChannelMap":
        return cls.from_kraus([np.eye(n)])

    @classmethod
    def transpose(cls, n: int) -> "ChannelMap":
        return cls.from_function(n, lambda x: x.T)

    @classmethod
    def completely_depolarizing(cls, n: int) -> "ChannelMap":
        """``x -> tr(x) I / n``."""
        return cls(n, np.eye(n * n, dtype=complex) / n)

    def to_json(self) -> str:
        from .systems import matrix_to_json
        return json.dumps({"n": self.n, "choi": matrix_to_json(self.choi)})

    @classmethod
    def from_json(cls, text: str) -> "ChannelMap":
        from .systems import matrix_from_json
        data = json.loads(text)
        return cls(int(data["n"]), matrix_from_json(data["choi"]))

    # evaluation -------------------------------------------------------------------

    @property
    def blocks(self) -> np.ndarray:
        """Array ``[i, a, j, b] = B_ij[a, b]``."""
        return self.choi.reshape(self.n, self.n, self.n, self.n)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i, :, j, :]

    def apply(self, x) -> np.ndarray:
        x = as_matrix(x)
        if x.shape != (self.n, self.n):
            raise DimensionError(f"map on M_{self.n} applied to shape {x.shape}")
        return np.einsum("ij,iajb->ab", x, self.blocks)

    __call__ = apply

    def at_identity(self) -> np.ndarray:
        return partial_trace_left(self.choi, self.n, self.n)

    def compose(self, other: "ChannelMap") -> "ChannelMap":
        """``self o other``."""
        return ChannelMap.from_function(self.n, lambda x: self.apply(other.apply(x)))

    def __add__(self, other: "ChannelMap") -> "ChannelMap":
        return ChannelMap(self.n, self.choi + other.choi)

    def __sub__(self, other: "ChannelMap") -> "ChannelMap":
        return ChannelMap(self.n, self.choi - other.choi)

    def scaled(self, s: complex) -> "ChannelMap":
        return ChannelMap(self.n, s * self.choi)

    # properties -------------------------------------------------------------------

    def is_hermiticity_preserving(self, tol: float = 1e-10) -> bool:
        return float(np.max(np.abs(self.choi - self.choi.conj().T))) <= tol

    def is_completely_positive(self, tol: float = PSD_TOL) -> bool:
        if not self.is_hermiticity_preserving(max(tol, 1e-12)):
            return False
        return min_eigenvalue(self.choi) >= -tol

    def is_unital(self, tol: float = 1e-9) -> bool:
        return float(np.max(np.abs(self.at_identity() - np.eye(self.n)))) <= tol

    def is_trace_preserving(self, tol: float = 1e-9) -> bool:
        pt = partial_trace_right(self.choi, self.n, self.n)
        return float(np.max(np.abs(pt - np.eye(self.n)))) <= tol

    def is_ucp(self, tol: float = PSD_TOL) -> bool:
        return self.is_completely_positive(tol) and self.is_unital(max(tol, 1e-12))

    def is_quantum_channel(self, tol: float = PSD_TOL) -> bool:
        return (self.is_completely_positive(tol) and self.is_unital(max(tol, 1e-12))
                and self.is_trace_preserving(max(tol, 1e-12)))


# ---------------------------------------------------------------------------
# the K inner product


def _check_pair(p: ChannelMap, q: ChannelMap) -> None:
    if p.n != q.n:
        raise DimensionError(f"maps on M_{p.n} and M_{q.n}")


def _offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def k_inner(p: ChannelMap, q: ChannelMap) -> complex:
    """``tr(p(I) q(I)^*) + sum_{i != j} tr(p(E_ij) q(E_ij)^*)``."""
    _check_pair(p, q)
    val = np.vdot(q.at_identity(), p.at_identity())
    bp = p.blocks.transpose(0, 2, 1, 3)[_offdiag_mask(p.n)]
    bq = q.blocks.transpose(0, 2, 1, 3)[_offdiag_mask(q.n)]
    return complex(val + np.vdot(bq, bp))


def k_norm(p: ChannelMap) -> float:
    return float(np.sqrt(max(k_inner(p, p).real, 0.0)))


def k_pairing_matrix(p: ChannelMap) -> np.ndarray:
    """``Q`` with ``k_inner(phi, p) = sum(conj(Q) * choi(phi))`` for every ``phi``.

    ``Q = sum_i E_ii (x) p(I) + sum_{i != j} E_ij (x) p(E_ij)``; it is Hermitian
    whenever ``p`` preserves Hermiticity, in which case the pairing is ``tr(Q C)``.
    """
    n = p.n
    blocks = p.blocks.copy()
    pid = p.at_identity()
    for i in range(n):
        blocks[i, :, i, :] = pid
    return blocks.reshape(n * n, n * n)


def k_coordinates(choi: np.ndarray, n: int) -> np.ndarray:
    """Real vector whose Euclidean norm is the K-norm of the map with Choi ``choi``.

    Linear in ``choi``: the entries of ``phi(I)`` and of the off-diagonal
    blocks, split into real and imaginary parts.
    """
    b = np.asarray(choi).reshape(n, n, n, n)
    pid = np.einsum("iaib->ab", b)
    off = b.transpose(0, 2, 1, 3)[_offdiag_mask(n)]
    z = np.concatenate([pid.ravel(), off.ravel()])
    return np.concatenate([z.real, z.imag])


# ---------------------------------------------------------------------------
# derived maps


def schur_channel(a) -> ChannelMap:
    """``x -> a o x`` (entrywise product)."""
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionError("Schur multiplier must be square")
    blocks = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            blocks[i, i, j, j] = a[i, j]
    return ChannelMap(n, blocks.reshape(n * n, n * n))


def phi_prime(p: ChannelMap) -> ChannelMap:
    """Average of ``p`` over conjugation by diagonal unitaries.

    Keeps the diagonal of each diagonal block and the ``(i, j)`` entry of the
    ``(i, j)`` block; everything else is zeroed.
    """
    n = p.n
    b = p.blocks
    out = np.zeros_like(b)
    for i in range(n):
        for a in range(n):
            out[i, a, i, a] = b[i, a, i, a]
        for j in range(n):
            if i != j:
                out[i, i, j, j] = b[i, i, j, j]
    return ChannelMap(n, out.reshape(n * n, n * n))


def multiplier_part(p: ChannelMap) -> np.ndarray:
    """``[p(E_ij)_ij]_ij`` for any map (no positivity required)."""
    return np.einsum("iijj->ij", p.blocks).copy()


def _require_cp(p: ChannelMap) -> None:
    if not p.is_completely_positive():
        raise ValueError("map is not completely positive")


def a_phi(p: ChannelMap) -> np.ndarray:
    """``[p(E_ij)_ij]_ij``; positive semidefinite because ``p`` must be CP."""
    _require_cp(p)
    return multiplier_part(p)


def b_phi(p: ChannelMap) -> np.ndarray:
    """``a_phi`` with its diagonal replaced by ``lambda_max(p(I))``."""
    a = a_phi(p)
    lam = float(np.linalg.eigvalsh(0.5 * (p.at_identity() + p.at_identity().conj().T))[-1])
    np.fill_diagonal(a, lam)
    return a


def conjugate(p: ChannelMap, q) -> ChannelMap:
    """``x -> q^* p(q x q^*) q``."""
    q = as_matrix(q)
    if q.shape != (p.n, p.n):
        raise DimensionError("conjugating matrix has the wrong size")
    qs = q.conj().T
    return ChannelMap.from_function(p.n, lambda x: qs @ p.apply(q @ x @ qs) @ q)


# ---------------------------------------------------------------------------
# random generation


DEFAULT_SEED = 20240611


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_diagonal_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * rng.random(n)))


def random_kraus_map(n: int, rng: np.random.Generator, rank: int | None = None) -> ChannelMap:
    """A random completely positive map with ``rank`` Gaussian Kraus operators."""
    rank = rank or n
    ks = [(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
          for _ in range(rank)]
    return ChannelMap.from_kraus(ks)


def random_unital_channel(n: int, rng: np.random.Generator, terms: int = 3) -> ChannelMap:
    """A random mixture of unitary conjugations (unital and trace preserving)."""
    w = rng.random(terms)
    w /= w.sum()
    ks = [np.sqrt(wi) * random_unitary(n, rng) for wi in w]
    return ChannelMap.from_kraus(ks)
