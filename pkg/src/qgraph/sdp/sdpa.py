"""SDPA sparse format.

Our primal ``max C.X s.t. A_i.X = b_i`` is the SDPA dual, so ``F0 = C`` and
``F_i = A_i`` with ``c = b``. Entries are written 1-based, upper triangle
only. ``min`` problems are exported with ``C`` negated; complex problems are
exported through the real reduction.
"""
from __future__ import annotations

import numpy as np

from .problem import LowRank, SdpProblem, complex_to_real


def _entries(mat: np.ndarray):
    n = mat.shape[0]
    for i in range(n):
        for j in range(i, n):
            v = mat[i, j]
            if v != 0:
                yield i + 1, j + 1, float(v)


def to_sdpa(problem: SdpProblem) -> str:
    p = problem if problem.is_real else complex_to_real(problem)
    sign = 1.0 if p.sense == "max" else -1.0
    lines = [f'"{p.name or "exported"}; sense={p.sense}; offset={p.offset!r}"',
             str(p.m), str(len(p.block_dims)),
             " ".join(str(d) for d in p.block_dims),
             " ".join(repr(float(v)) for v in p.b)]
    for k, c in enumerate(p.C):
        for i, j, v in _entries(sign * np.real(c)):
            lines.append(f"0 {k + 1} {i} {j} {v!r}")
    for r, row in enumerate(p.A):
        for k, a in enumerate(row):
            if a is None:
                continue
            d = a.dense() if isinstance(a, LowRank) else a
            for i, j, v in _entries(np.real(d)):
                lines.append(f"{r + 1} {k + 1} {i} {j} {v!r}")
    return "\n".join(lines) + "\n"


def from_sdpa(text: str) -> SdpProblem:
    """Read a problem in SDPA sparse format (as a ``max`` problem)."""
    rows = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln[0] in '"*':
            continue
        rows.append(ln.replace(",", " ").replace("{", " ").replace("}", " ")
                    .replace("(", " ").replace(")", " "))
    if len(rows) < 4:
        raise ValueError("truncated SDPA input")
    m = int(rows[0].split()[0])
    nb = int(rows[1].split()[0])
    dims = [abs(int(t)) for t in rows[2].split()[:nb]]
    b = np.array([float(t) for t in rows[3].split()[:m]])
    C = [np.zeros((d, d)) for d in dims]
    A = [[None] * nb for _ in range(m)]
    for ln in rows[4:]:
        k, blk, i, j, v = ln.split()[:5]
        k, blk, i, j, v = int(k), int(blk) - 1, int(i) - 1, int(j) - 1, float(v)
        if k == 0:
            target = C[blk]
        else:
            if A[k - 1][blk] is None:
                A[k - 1][blk] = np.zeros((dims[blk], dims[blk]))
            target = A[k - 1][blk]
        target[i, j] = v
        target[j, i] = v
    return SdpProblem(C, A, b, sense="max")
