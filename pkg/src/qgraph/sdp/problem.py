"""SDP data model, the complex-to-real reduction and the symbolic dual.

Primal (sense ``"max"``)::

    maximize    C . X + offset
    subject to  A_i . X = b_i
                X = diag(X_1, ..., X_K) positive semidefinite

with ``A . X = tr(A X)`` summed over blocks. The matching dual is
``minimize b.y + offset  s.t.  sum_i y_i A_i - C  PSD``. Sense ``"min"``
minimizes ``C . X`` and has dual ``maximize b.y  s.t.  C - sum_i y_i A_i PSD``.

Blocks may hold complex Hermitian data; the solver only ever sees real
symmetric problems, produced by :func:`complex_to_real`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from ..linalg import DimensionError, hermitian


@dataclass(frozen=True)
class LowRank:
    """The Hermitian matrix ``sum_r w_r f_r f_r^*`` kept in factored form."""

    factors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.factors))
        w = np.asarray(self.weights, dtype=float).ravel()
        if f.shape[1] != w.size:
            raise DimensionError("one weight per factor column required")
        object.__setattr__(self, "factors", f)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.factors.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.factors) and bool(np.any(self.factors.imag != 0))

    def dense(self) -> np.ndarray:
        f = self.factors
        return (f * self.weights) @ f.conj().T

    def scaled(self, s: float) -> "LowRank":
        return LowRank(self.factors, self.weights * s)

    def realified(self) -> "LowRank":
        a, b = self.factors.real, self.factors.imag
        g1 = np.vstack([a, b])
        g2 = np.vstack([-b, a])
        return LowRank(np.hstack([g1, g2]), np.concatenate([self.weights, self.weights]))

    def fro_inner(self, other: "LowRank") -> float:
        g = np.abs(self.factors.conj().T @ other.factors) ** 2
        return float(self.weights @ g @ other.weights)


def arrow(u: np.ndarray, scale: float = 1.0) -> LowRank:
    """``scale * (u e^T + e u^T)`` where ``e`` is the extra last coordinate."""
    u = np.asarray(u, dtype=float).ravel()
    d = u.size
    nu = np.linalg.norm(u)
    if nu == 0:
        return LowRank(np.zeros((d + 1, 1)), np.zeros(1))
    p = np.append(u / nu, 1.0)
    q = np.append(u / nu, -1.0)
    # u e^T + e u^T = (|u|/2) (p p^T - q q^T)
    return LowRank(np.column_stack([p, q]), np.array([0.5, -0.5]) * nu * scale)


def corner(d: int) -> LowRank:
    e = np.zeros((d + 1, 1))
    e[-1, 0] = 1.0
    return LowRank(e, np.ones(1))


Block = Union[np.ndarray, LowRank]


def _is_complex(m) -> bool:
    if m is None:
        return False
    if isinstance(m, LowRank):
        return m.is_complex
    return np.iscomplexobj(m) and bool(np.any(m.imag != 0))


def _as_dense(m, dim: int) -> np.ndarray:
    if m is None:
        return np.zeros((dim, dim))
    if isinstance(m, LowRank):
        return m.dense()
    return m


@dataclass
class SdpProblem:
    """Block-diagonal SDP in the standard equality form.

    ``A[i][k]`` is constraint ``i`` restricted to block ``k`` (``None`` when
    the constraint does not touch that block). Dense data is symmetrized on
    construction.
    """

    C: list
    A: list
    b: np.ndarray
    sense: str = "max"
    offset: float = 0.0
    independent: bool = False
    name: str = ""

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        b = np.asarray(self.b)
        if np.iscomplexobj(b):
            if np.any(b.imag != 0):
                raise ValueError("constraint right-hand sides must be real")
            b = b.real
        self.b = np.asarray(b, dtype=float).ravel()
        cs = []
        for c in self.C:
            h = hermitian(c)
            cs.append(h if _is_complex(h) else h.real)
        self.C = cs
        dims = self.block_dims
        if len(self.A) != self.b.size:
            raise DimensionError(f"{len(self.A)} constraints but {self.b.size} right-hand sides")
        rows = []
        for i, row in enumerate(self.A):
            if len(row) != len(dims):
                raise DimensionError(f"constraint {i} has {len(row)} blocks, expected {len(dims)}")
            new = []
            for k, m in enumerate(row):
                if m is None:
                    new.append(None)
                    continue
                if isinstance(m, LowRank):
                    if m.dim != dims[k]:
                        raise DimensionError(f"constraint {i} block {k}: dim {m.dim} != {dims[k]}")
                    new.append(m)
                    continue
                m = hermitian(m)
                if m.shape[0] != dims[k]:
                    raise DimensionError(f"constraint {i} block {k}: shape {m.shape} != {dims[k]}")
                new.append(m if _is_complex(m) else m.real)
            rows.append(new)
        self.A = rows

    @classmethod
    def single(cls, C, A: Sequence, b, **kw) -> "SdpProblem":
        """Single-block convenience constructor."""
        return cls([C], [[a] for a in A], b, **kw)

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(c.shape[0] for c in self.C)

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def complex_blocks(self) -> tuple[bool, ...]:
        flags = [_is_complex(c) for c in self.C]
        for row in self.A:
            for k, a in enumerate(row):
                flags[k] = flags[k] or _is_complex(a)
        return tuple(flags)

    @property
    def is_real(self) -> bool:
        return not any(self.complex_blocks)

    def objective(self, X: Sequence[np.ndarray]) -> float:
        return float(sum(np.real(np.vdot(c, x)) for c, x in zip(self.C, X))) + self.offset

    def constraint_values(self, X: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for i, row in enumerate(self.A):
            out[i] = sum(np.real(np.vdot(_as_dense(a, x.shape[0]), x))
                         for a, x in zip(row, X) if a is not None)
        return out

    def dense_constraint(self, i: int, k: int) -> np.ndarray:
        return _as_dense(self.A[i][k], self.block_dims[k])


# ---------------------------------------------------------------------------
# complex -> real


def realify(a: np.ndarray) -> np.ndarray:
    """``[[re A, -im A], [im A, re A]]``."""
    a = np.asarray(a)
    re, im = a.real, a.imag if np.iscomplexobj(a) else np.zeros_like(a, dtype=float)
    return np.block([[re, -im], [im, re]])


def unrealify(y: np.ndarray) -> np.ndarray:
    """Inverse of :func:`realify` on the structured subspace (averages otherwise)."""
    n = y.shape[0] // 2
    y11, y12, y21, y22 = y[:n, :n], y[:n, n:], y[n:, :n], y[n:, n:]
    return 0.5 * (y11 + y22) + 0.5j * (y21 - y12)


def _structure_constraints(n: int) -> list[np.ndarray]:
    """Symmetrized F_ij and G_ij (i <= j) that cut out realified matrices."""
    out = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0 if i == j else 0.5
            z = np.zeros((n, n))
            out.append(np.block([[e, z], [z, -e]]))
            out.append(np.block([[z, e], [e, z]]))
    return out


def complex_to_real(p: SdpProblem, structure: bool = True,
                    realify_all: bool = False) -> SdpProblem:
    """Real symmetric program whose optimum is exactly twice that of ``p``.

    Complex blocks of size ``n`` become real blocks of size ``2n`` holding
    ``[[re, -im], [im, re]]``; real blocks keep their size with data doubled;
    right-hand sides double. With ``structure`` the consistency constraints
    forcing the realified block pattern are appended (one block at a time).
    ``realify_all`` treats every block as complex, even when its data is real.
    """
    flags = tuple(True for _ in p.block_dims) if realify_all else p.complex_blocks
    C = [realify(c) if f else 2.0 * c.real for c, f in zip(p.C, flags)]
    A = []
    for row in p.A:
        new = []
        for a, f in zip(row, flags):
            if a is None:
                new.append(None)
            elif isinstance(a, LowRank):
                new.append(a.realified() if f else a.scaled(2.0))
            else:
                new.append(realify(a) if f else 2.0 * a.real)
        A.append(new)
    b = list(2.0 * p.b)
    if structure:
        for k, f in enumerate(flags):
            if not f:
                continue
            for s in _structure_constraints(p.block_dims[k]):
                row = [None] * len(flags)
                row[k] = s
                A.append(row)
                b.append(0.0)
    return SdpProblem(C, A, np.array(b), sense=p.sense, offset=2.0 * p.offset,
                      independent=p.independent, name=p.name + " [realified]")


# ---------------------------------------------------------------------------
# Hermitian coordinates


def hvec(a: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix (length ``n^2``)."""
    a = np.asarray(a)
    n = a.shape[0]
    iu = np.triu_indices(n, 1)
    im = a.imag if np.iscomplexobj(a) else np.zeros((n, n))
    return np.concatenate([a.diagonal().real, np.sqrt(2) * a.real[iu], np.sqrt(2) * im[iu]])


def hmat(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    iu = np.triu_indices(n, 1)
    k = iu[0].size
    out = np.zeros((n, n), dtype=complex)
    out[iu] = (v[n:n + k] + 1j * v[n + k:]) / np.sqrt(2)
    out = out + out.conj().T
    out[np.diag_indices(n)] = v[:n]
    return out


def svec(a: np.ndarray) -> np.ndarray:
    """Isometric coordinates of a real symmetric matrix (length ``n(n+1)/2``)."""
    n = a.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.asarray(a).diagonal(), np.sqrt(2) * np.asarray(a)[iu]])


def smat(v: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    out = np.zeros((n, n))
    out[iu] = v[n:] / np.sqrt(2)
    out = out + out.T
    out[np.diag_indices(n)] = v[:n]
    return out


# ---------------------------------------------------------------------------
# dual


@dataclass
class DualProblem:
    """The dual of an :class:`SdpProblem`, kept in its linear-matrix-inequality form.

    For a ``max`` primal this is ``min b.y + offset  s.t.  sum y_i A_i - C PSD``;
    for a ``min`` primal it is ``max b.y + offset  s.t.  C - sum y_i A_i PSD``.
    """

    primal: SdpProblem
    sense: str = field(init=False)

    def __post_init__(self):
        self.sense = "min" if self.primal.sense == "max" else "max"

    @property
    def b(self) -> np.ndarray:
        return self.primal.b

    def _combo(self, y) -> list[np.ndarray]:
        p = self.primal
        out = [np.zeros_like(c, dtype=complex if _is_complex(c) or f else float)
               for c, f in zip(p.C, p.complex_blocks)]
        for yi, row in zip(np.asarray(y, dtype=float), p.A):
            for k, a in enumerate(row):
                if a is not None:
                    out[k] = out[k] + yi * _as_dense(a, out[k].shape[0])
        return out

    def slack(self, y) -> list[np.ndarray]:
        comb = self._combo(y)
        if self.primal.sense == "max":
            return [s - c for s, c in zip(comb, self.primal.C)]
        return [c - s for s, c in zip(comb, self.primal.C)]

    def objective(self, y) -> float:
        return float(np.dot(self.b, y)) + self.primal.offset

    def is_feasible(self, y, tol: float = 1e-9) -> bool:
        from ..linalg import min_eigenvalue
        return all(min_eigenvalue(s) >= -tol for s in self.slack(y))

    def describe(self) -> str:
        lhs = "sum_i y_i A_i - C" if self.primal.sense == "max" else "C - sum_i y_i A_i"
        return (f"{self.sense}imize b.y + offset subject to {lhs} PSD "
                f"(m={self.primal.m}, blocks={self.primal.block_dims})")

    def to_sdp(self) -> SdpProblem:
        """Restate the dual as a standard-form program in the slack variable.

        With ``Z`` the slack, ``Z + C`` (max primal) must lie in the span of the
        ``A_i``; this is imposed through an orthonormal basis of the orthogonal
        complement of that span, and ``b.y`` is rewritten as a linear function
        of ``Z`` through the Gram matrix of the ``A_i``.
        """
        p = self.primal
        dims = p.block_dims
        flags = p.complex_blocks
        sizes = [n * n if f else n * (n + 1) // 2 for n, f in zip(dims, flags)]
        enc = [(lambda a, f=f: hvec(a) if f else svec(np.real(a))) for f in flags]
        dec = [(lambda v, n=n, f=f: hmat(v, n) if f else smat(v, n)) for n, f in zip(dims, flags)]
        rows = np.zeros((p.m, sum(sizes)))
        offs = np.cumsum([0] + sizes)
        for i in range(p.m):
            for k in range(len(dims)):
                if p.A[i][k] is not None:
                    rows[i, offs[k]:offs[k + 1]] = enc[k](p.dense_constraint(i, k))
        cvec = np.concatenate([enc[k](p.C[k]) for k in range(len(dims))])
        if p.m:
            u, s, vt = np.linalg.svd(rows, full_matrices=True)
            rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
            null = vt[rank:]
            gram_pinv = np.linalg.pinv(rows @ rows.T, rcond=1e-12)
            btilde = rows.T @ (gram_pinv @ p.b)
        else:
            null = np.eye(rows.shape[1])
            btilde = np.zeros(rows.shape[1])

        def unpack(v):
            return [dec[k](v[offs[k]:offs[k + 1]]) for k in range(len(dims))]

        sign = 1.0 if p.sense == "max" else -1.0
        # max primal: N.(Z + C) = 0 ; min primal: N.(C - Z) = 0
        A = [unpack(nr) for nr in null]
        b = -sign * null @ cvec
        obj = unpack(sign * btilde)
        offset = float(btilde @ cvec) + p.offset
        return SdpProblem(obj, A, b, sense=self.sense, offset=offset,
                          name=(p.name + " [dual]").strip())


def dual_of(p: SdpProblem) -> DualProblem:
    return DualProblem(p)
