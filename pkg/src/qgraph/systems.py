"""Matricial systems: self-adjoint subspaces of M_n that contain the identity."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .channel import ChannelMap
from .graphs import Graph
from .linalg import DimensionError, as_matrix

DROP_TOL = 1e-10
MEMBERSHIP_TOL = 1e-9


class InvalidSystemError(ValueError):
    """The supplied span is not a matricial system."""


def _orthonormalize(vectors: np.ndarray, drop_tol: float = DROP_TOL) -> np.ndarray:
    """Gram-Schmidt with one reorthogonalization pass; returns orthonormal rows."""
    basis: list[np.ndarray] = []
    for v in vectors:
        w = v.astype(complex)
        scale = np.linalg.norm(w)
        if scale == 0:
            continue
        for _ in range(2):
            if basis:
                q = np.array(basis)
                w = w - q.T @ (q.conj() @ w)
        nw = np.linalg.norm(w)
        if nw > drop_tol * max(scale, 1.0):
            basis.append(w / nw)
    return np.array(basis).reshape(len(basis), vectors.shape[1])


@dataclass(frozen=True, eq=False)
class MatricialSystem:
    """A self-adjoint unital subspace of M_n, kept as an orthonormal basis.

    The basis is orthonormal for the Hilbert-Schmidt inner product; the
    orthocomplement basis spans the rest of M_n.
    """

    n: int
    basis: np.ndarray
    complement: np.ndarray = field(repr=False)
    label: str = ""

    @classmethod
    def from_basis(cls, n: int, mats: Sequence, label: str = "") -> "MatricialSystem":
        arrs = [as_matrix(m) for m in mats]
        if not arrs:
            raise InvalidSystemError("empty spanning set")
        for a in arrs:
            if a.shape != (n, n):
                raise DimensionError(f"basis element of shape {a.shape}, expected {(n, n)}")
        vecs = np.array([a.ravel() for a in arrs])
        q = _orthonormalize(vecs)
        proj = lambda v: q.T @ (q.conj() @ v)
        ident = np.eye(n).ravel()
        if np.linalg.norm(proj(ident) - ident) > MEMBERSHIP_TOL * np.sqrt(n):
            raise InvalidSystemError("span does not contain the identity")
        adj = np.array([a.conj().T.ravel() for a in arrs])
        resid = max(np.linalg.norm(proj(v) - v) / max(np.linalg.norm(v), 1e-300) for v in adj)
        if resid > MEMBERSHIP_TOL:
            raise InvalidSystemError("span is not closed under the adjoint")
        comp = scipy.linalg.null_space(q.conj()).T if q.shape[0] < n * n \
            else np.zeros((0, n * n), dtype=complex)
        return cls(n, q.reshape(-1, n, n), comp.reshape(-1, n, n), label)

    @classmethod
    def full(cls, n: int) -> "MatricialSystem":
        units = []
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n))
                e[i, j] = 1
                units.append(e)
        return cls.from_basis(n, units, f"M_{n}")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project(self, x) -> np.ndarray:
        x = as_matrix(x)
        coef = np.einsum("kij,ij->k", self.basis.conj(), x)
        return np.einsum("k,kij->ij", coef, self.basis)

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = as_matrix(x)
        if x.shape != (self.n, self.n):
            return False
        return np.linalg.norm(self.project(x) - x) <= tol * max(1.0, np.linalg.norm(x))

    __contains__ = contains

    def is_real(self) -> bool:
        """True when S is closed under entrywise conjugation, i.e. ``P_S`` has a real Choi matrix.

        Programs over such a system have a real optimizer, so they can be
        solved in real arithmetic (``span{I, sigma_y}`` qualifies).
        """
        p = np.einsum("kij,kab->ijab", self.basis.conj(), self.basis)
        return bool(np.max(np.abs(p.imag)) < 1e-12)

    def projection_channel(self) -> ChannelMap:
        """The orthogonal projection of M_n onto the system, as a map."""
        n = self.n
        # choi[i, a, j, b] = sum_k conj(B_k[i, j]) B_k[a, b]
        blocks = np.einsum("kij,kab->iajb", self.basis.conj(), self.basis)
        if np.max(np.abs(blocks.imag)) < 1e-14:
            blocks = blocks.real.astype(complex)
        return ChannelMap(n, blocks.reshape(n * n, n * n))

    def hermitian_complement(self) -> list[np.ndarray]:
        """HS-orthonormal Hermitian matrices whose complex span is the orthocomplement."""
        from .sdp.problem import hmat, hvec
        n = self.n
        cands = []
        for k in self.complement:
            cands.append(hvec(0.5 * (k + k.conj().T)))
            cands.append(hvec(0.5j * (k.conj().T - k)))
        if not cands:
            return []
        u, s, vt = np.linalg.svd(np.array(cands), full_matrices=False)
        rank = int(np.sum(s > DROP_TOL * max(s[0], 1.0)))
        return [hmat(v, n) for v in vt[:rank]]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "label": self.label,
                           "basis": [matrix_to_json(b) for b in self.basis]})

    @classmethod
    def from_json(cls, text: str) -> "MatricialSystem":
        try:
            data = json.loads(text)
            n = int(data["n"])
            mats = [matrix_from_json(m) for m in data["basis"]]
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InvalidSystemError(f"malformed system JSON: {exc}") from None
        return cls.from_basis(n, mats, data.get("label", ""))


def graph_system(g: Graph) -> MatricialSystem:
    """``span{E_ii} + span{E_ij, E_ji : ij an edge}``."""
    n = g.n
    mats = []
    for i in range(n):
        e = np.zeros((n, n))
        e[i, i] = 1
        mats.append(e)
    for i, j in g.sorted_edges():
        for a, b in ((i, j), (j, i)):
            e = np.zeros((n, n))
            e[a, b] = 1
            mats.append(e)
    return MatricialSystem.from_basis(n, mats, f"S_G(n={n}, m={g.m})")


def constant_diagonal_system(n: int) -> MatricialSystem:
    """Matrices with constant diagonal (dimension ``n^2 - n + 1``)."""
    mats = [np.eye(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                e = np.zeros((n, n))
                e[i, j] = 1
                mats.append(e)
    return MatricialSystem.from_basis(n, mats, f"S_{n}")


def tensor(s: MatricialSystem, t: MatricialSystem) -> MatricialSystem:
    mats = [np.kron(a, b) for a in s.basis for b in t.basis]
    return MatricialSystem.from_basis(s.n * t.n, mats, f"({s.label} (x) {t.label})")


def conjugate_system(s: MatricialSystem, u) -> MatricialSystem:
    """``u^* S u``; a matricial system again whenever ``u`` is unitary."""
    u = as_matrix(u)
    return MatricialSystem.from_basis(s.n, [u.conj().T @ b @ u for b in s.basis],
                                      f"U*{s.label}U")


def optimal_diag_channel(n: int) -> ChannelMap:
    """``A -> tr(A) I / n + sum_{i != j} A_ij E_ij / n``."""
    blocks = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for a in range(n):
            blocks[i, a, i, a] = 1.0 / n
        for j in range(n):
            if i != j:
                blocks[i, i, j, j] = 1.0 / n
    return ChannelMap(n, blocks.reshape(n * n, n * n))


# ---------------------------------------------------------------------------
# JSON matrices: nested rows of [re, im] pairs


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidSystemError("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
