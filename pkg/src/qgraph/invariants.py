"""Graph and system invariants computed through the SDP engine.

Graph routes work directly with an n x n matrix variable; the general routes
optimize over Choi matrices of maps on M_n and apply to any matricial system.
For graph systems the two agree.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channel import ChannelMap, k_coordinates, k_pairing_matrix
from .graphs import CapabilityError, Graph
from .linalg import matrix_unit, psd_sqrt_factor
from .sdp import (LowRank, SdpProblem, SdpSolution, SolverOptions, arrow, corner, hmat, hvec,
                  smat, solve, svec)
from .sdp.solver import DependentConstraintWarning
from .systems import MatricialSystem

MAX_LIN_GENERAL_N = 6
MAX_QUAD_GENERAL_N = 4


class SolverFailure(RuntimeError):
    """The underlying SDP did not reach optimal status."""

    def __init__(self, message: str, solution: SdpSolution | None = None):
        super().__init__(message)
        self.solution = solution


@dataclass
class InvariantResult:
    name: str
    value: float
    certificate: Any
    gap: float
    route: str
    status: str = "optimal"
    dual_certificate: Any = None
    solution: SdpSolution | None = field(default=None, repr=False)

    def to_dict(self, with_certificate: bool = False) -> dict:
        out = {"invariant": self.name, "value": self.value, "gap": self.gap,
               "route": self.route, "status": self.status}
        if with_certificate and self.certificate is not None:
            cert = self.certificate.choi if isinstance(self.certificate, ChannelMap) \
                else self.certificate
            out["certificate"] = np.real_if_close(np.asarray(cert)).tolist()
        return out


# phi_quad is read off an argmin, which converges more slowly than the optimal
# value on degenerate instances, so its default tolerances are tighter.
QUAD_DEFAULTS = SolverOptions(tol_gap=1e-11, tol_feas=1e-11)


def _opts(opts: SolverOptions | None, default: SolverOptions | None = None) -> SolverOptions:
    if opts is not None:
        return opts
    return default if default is not None else SolverOptions()


def _run(problem: SdpProblem, opts: SolverOptions) -> SdpSolution:
    sol = solve(problem, opts)
    if sol.status != "optimal":
        raise SolverFailure(f"{problem.name}: solver status {sol.status}", sol)
    return sol


def _sym_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n))
    e[i, j] = e[j, i] = 1.0
    return e


# ---------------------------------------------------------------------------
# graph programs


def lovasz_theta_problem(g: Graph) -> SdpProblem:
    n = g.n
    A = [np.eye(n)] + [_sym_unit(n, i, j) for i, j in g.sorted_edges()]
    b = [1.0] + [0.0] * g.m
    return SdpProblem.single(np.ones((n, n)), A, b, independent=True, name="theta")


def lovasz_theta(g: Graph, opts: SolverOptions | None = None) -> InvariantResult:
    """``max J.Y`` over trace-one PSD ``Y`` vanishing on the edges."""
    sol = _run(lovasz_theta_problem(g), _opts(opts))
    return InvariantResult("theta", sol.primal_obj, sol.X[0], sol.gap, "graph_sdp",
                           dual_certificate=sol.S[0], solution=sol)


def phi_lin_problem(g: Graph) -> SdpProblem:
    n = g.n
    A = [matrix_unit(n, i, i) for i in range(n)]
    A += [_sym_unit(n, i, j) for i, j in g.non_edges()]
    b = [1.0] * n + [0.0] * (len(A) - n)
    return SdpProblem.single(np.ones((n, n)) / n, A, b, independent=True, name="phi_lin")


def phi_lin_graph(g: Graph, opts: SolverOptions | None = None) -> InvariantResult:
    """``max J.A / n`` over PSD ``A`` with unit diagonal vanishing off the edges.

    The dual certificate is ``Y = S + J/n``, feasible for the dual program.
    """
    sol = _run(phi_lin_problem(g), _opts(opts))
    y = sol.S[0] + np.ones((g.n, g.n)) / g.n
    return InvariantResult("phi_lin", sol.primal_obj, sol.X[0], sol.gap, "graph_sdp",
                           dual_certificate=y, solution=sol)


def phi_lin_dual_problem(g: Graph) -> SdpProblem:
    """``min tr(Y)`` with ``Y_ij = 0`` on edges and ``Y >= J/n``, in the slack ``Z = Y - J/n``."""
    n = g.n
    A = [_sym_unit(n, i, j) for i, j in g.sorted_edges()]
    b = [-2.0 / n] * g.m
    return SdpProblem.single(np.eye(n), A, b, sense="min", offset=1.0, independent=True,
                             name="phi_lin_dual")


def phi_lin_dual(g: Graph, opts: SolverOptions | None = None) -> InvariantResult:
    sol = _run(phi_lin_dual_problem(g), _opts(opts))
    y = sol.X[0] + np.ones((g.n, g.n)) / g.n
    return InvariantResult("phi_lin", sol.primal_obj, y, sol.gap, "dual", solution=sol)


EPIGRAPH_FORMS = ("norm", "squared")


def _epigraph(w0: np.ndarray, G: np.ndarray, form: str):
    """Blocks bounding ``|w0 + G y|`` by the last variable ``t``.

    ``norm``: ``[[t I, w], [w^T, t]] >= 0``, i.e. ``t >= |w|``.
    ``squared``: ``[[I, w], [w^T, t]] >= 0``, i.e. ``t >= |w|^2``.
    Returns the constant block, one arrow per column of ``G`` and the ``t`` block.
    """
    if form not in EPIGRAPH_FORMS:
        raise ValueError(f"epigraph form must be one of {EPIGRAPH_FORMS}")
    r = w0.size
    f0 = np.zeros((r + 1, r + 1)) if form == "norm" else np.eye(r + 1)
    f0[:r, r] = f0[r, :r] = w0
    f0[r, r] = 0.0
    cols = [arrow(G[:, k]) for k in range(G.shape[1])]
    t_block = LowRank(np.eye(r + 1), np.ones(r + 1)) if form == "norm" else corner(r)
    return f0, cols, t_block


def phi_quad_problem(g: Graph, form: str = "norm") -> SdpProblem:
    """Epigraph program for ``min ||A - J||`` over the feasible set of phi_lin.

    Variables are the edge entries ``a_e`` of ``A = I + sum a_e (E_ij + E_ji)``
    and ``t``. Only the edge entries of ``A - J`` move; they form
    ``w = sqrt(2)(a - 1)``. Posed on the dual (LMI) side of the engine:
    minimize ``t`` subject to ``A >= 0`` and the epigraph block.
    """
    n, edges = g.n, g.sorted_edges()
    m = len(edges)
    r2 = np.sqrt(2.0)
    f0_w, cols, t_block = _epigraph(-r2 * np.ones(m), r2 * np.eye(m), form)
    A = [[_sym_unit(n, i, j), col] for (i, j), col in zip(edges, cols)]
    A.append([None, t_block])
    b = np.zeros(m + 1)
    b[m] = 1.0
    return SdpProblem([-np.eye(n), -f0_w], A, b, independent=True, name="phi_quad")


def phi_quad_graph(g: Graph, opts: SolverOptions | None = None,
                   form: str = "norm") -> InvariantResult:
    """``(A_* . J)/n`` at ``A_* = argmin ||A - J||`` over the phi_lin feasible set.

    The default ``norm`` epigraph has a sharp minimum and converges fast even
    when ``J`` restricted to the graph is already feasible; ``squared`` is the
    textbook quadratic epigraph and converges at a square-root rate there.
    """
    n, edges = g.n, g.sorted_edges()
    sol = _run(phi_quad_problem(g, form), _opts(opts, QUAD_DEFAULTS))
    a = np.eye(n)
    for (i, j), v in zip(edges, sol.y[:len(edges)]):
        a[i, j] = a[j, i] = v
    value = float(a.sum()) / n
    return InvariantResult("phi_quad", value, a, sol.gap, "graph_sdp", solution=sol)


# ---------------------------------------------------------------------------
# general Choi programs


class _ChoiConstraints:
    """Hermitian equality constraints describing feasible Choi matrices."""

    def __init__(self, s: MatricialSystem):
        n = s.n
        self.n = n
        self.real = s.is_real()
        mats, rhs = [], []

        def add(m: np.ndarray, target: complex):
            h1 = 0.5 * (m + m.conj().T)
            h2 = (m - m.conj().T) / 2j
            floor = 1e-12 * max(1.0, float(np.max(np.abs(m))))
            for h, t in ((h1, target.real), (h2, target.imag)):
                if self.real:
                    h = h.real
                if np.max(np.abs(h)) > floor:
                    mats.append(h)
                    rhs.append(t)

        # range inside M_n (x) S: pair each block with a Hermitian basis of S-perp
        herm = []
        for i in range(n):
            herm.append(matrix_unit(n, i, i))
            for j in range(i + 1, n):
                herm.append(_sym_unit(n, i, j) / np.sqrt(2))
                e = np.zeros((n, n), dtype=complex)
                e[i, j], e[j, i] = -1j, 1j
                herm.append(e / np.sqrt(2))
        for k in s.hermitian_complement():
            for h in herm:
                add(np.kron(h, k), 0j)
        for kk in range(n):
            for ll in range(kk, n):
                target = 1.0 + 0j if kk == ll else 0j
                add(np.kron(np.eye(n), matrix_unit(n, ll, kk)), target)   # unital
                add(np.kron(matrix_unit(n, ll, kk), np.eye(n)), target)   # trace preserving
        self.mats = mats
        self.rhs = np.array(rhs)

    def encode(self, h: np.ndarray) -> np.ndarray:
        return svec(h.real) if self.real else hvec(h)

    def decode(self, v: np.ndarray) -> np.ndarray:
        d = self.n * self.n
        return smat(v, d) if self.real else hmat(v, d)

    def independent(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal row basis of the constraint space, its rhs, and a null-space basis."""
        rows = np.array([self.encode(h) for h in self.mats])
        u, sv, vt = np.linalg.svd(rows, full_matrices=True)
        rank = int(np.sum(sv > 1e-10 * sv[0]))
        return rows, vt[:rank], vt[rank:]


def _general_guard(s: MatricialSystem, cap: int) -> None:
    if s.n > cap:
        raise CapabilityError(f"general Choi route capped at n <= {cap}, got n = {s.n}")


def phi_lin_general_problem(s: MatricialSystem) -> SdpProblem:
    cons = _ChoiConstraints(s)
    q = k_pairing_matrix(s.projection_channel())
    q = q.real if cons.real else q
    return SdpProblem.single(q / s.n, cons.mats, cons.rhs, name="phi_lin_general")


def phi_lin_general(s: MatricialSystem, opts: SolverOptions | None = None) -> InvariantResult:
    """``max (1/n) <Phi, P_S>_K`` over quantum operations with range in S."""
    _general_guard(s, MAX_LIN_GENERAL_N)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DependentConstraintWarning)
        sol = _run(phi_lin_general_problem(s), _opts(opts))
    phi = ChannelMap(s.n, sol.X[0])
    return InvariantResult("phi_lin", sol.primal_obj, phi, sol.gap, "general_choi",
                           dual_certificate=sol.S[0], solution=sol)


def phi_quad_general(s: MatricialSystem, opts: SolverOptions | None = None,
                     form: str = "norm") -> InvariantResult:
    """``(1/n) <Phi_*, P_S>_K`` at the K-nearest feasible quantum operation ``Phi_*``.

    Feasible Choi matrices are ``C0 + sum_k y_k H_k`` with ``C0 = I/n`` and
    ``H_k`` an orthonormal basis of the constraint null space. The K-residual
    is linear in ``y``; after a rank-revealing factorization its squared norm
    is ``|w0 + G y|^2 + const`` and an arrow block of size ``rank + 1``
    carries the epigraph (see :func:`phi_quad_graph` for ``form``).
    """
    _general_guard(s, MAX_QUAD_GENERAL_N)
    n = s.n
    d = n * n
    cons = _ChoiConstraints(s)
    p_s = s.projection_channel()
    _, _, null = cons.independent()
    H = [cons.decode(v) for v in null]
    c0 = np.eye(d) / n
    kmap = lambda c: k_coordinates(c, n)
    R = np.column_stack([kmap(h) for h in H]) if H else np.zeros((2 * (n * n + d * (n - 1)), 0))
    r0 = kmap(c0 - p_s.choi)
    if H:
        w, sv, vt = np.linalg.svd(R, full_matrices=False)
        rank = int(np.sum(sv > 1e-10 * max(sv[0], 1.0))) if sv.size else 0
    else:
        rank = 0
    if rank == 0:
        G = np.zeros((0, len(H)))
        w0 = np.zeros(0)
    else:
        G = sv[:rank, None] * vt[:rank]
        w0 = w[:, :rank].T @ r0
    f0_w, cols, t_block = _epigraph(w0, G, form)
    A = [[h.real if cons.real else h, col] for h, col in zip(H, cols)]
    A.append([None, t_block])
    b = np.zeros(len(H) + 1)
    b[-1] = 1.0
    prob = SdpProblem([-c0, -f0_w], A, b, independent=True, name="phi_quad_general")
    sol = _run(prob, _opts(opts, QUAD_DEFAULTS))
    y = sol.y[:len(H)]
    choi = c0 + sum((yk * h for yk, h in zip(y, H)), np.zeros((d, d), dtype=complex))
    phi = ChannelMap(n, 0.5 * (choi + choi.conj().T))
    q = k_pairing_matrix(p_s)
    value = float(np.real(np.vdot(q, phi.choi))) / n
    return InvariantResult("phi_quad", value, phi, sol.gap, "general_choi", solution=sol)


# ---------------------------------------------------------------------------
# vector representation


@dataclass
class VectorRepresentation:
    """Unit-handle orthogonal representation read off the phi_lin dual.

    ``vectors[i] . vectors[j] = 0`` for every pair in ``orthogonal_pairs``
    and ``handle . vectors[i] = t`` with ``t = 1/sqrt(phi_lin)``.
    """

    vectors: np.ndarray
    handle: np.ndarray
    t: float
    phi_lin: float
    orthogonal_pairs: list

    def residuals(self) -> dict:
        u, c = self.vectors, self.handle
        gram = u @ u.T
        ortho = max((abs(gram[i, j]) for i, j in self.orthogonal_pairs), default=0.0)
        return {
            "handle_norm": abs(float(np.linalg.norm(c)) - 1.0),
            "sum_sq": abs(float(np.trace(gram)) - u.shape[0]),
            "handle_slack": float(np.min(u @ c) - self.t),
            "orthogonality": float(ortho),
            "t_vs_phi_lin": abs(self.t - 1.0 / np.sqrt(self.phi_lin)),
        }

    def check(self, tol: float = 1e-8) -> bool:
        r = self.residuals()
        return (r["handle_norm"] <= 1e-10 and r["sum_sq"] <= tol and r["handle_slack"] >= -tol
                and r["orthogonality"] <= tol)


def extract_vector_representation(g: Graph, opts: SolverOptions | None = None
                                  ) -> VectorRepresentation:
    """Vectors ``u_i = (c + s_i)/sqrt(t)`` from ``X = nY - J = S^T S``.

    ``Y`` is the dual optimum of phi_lin(g), which vanishes on the edges of g,
    so the ``u_i`` are orthogonal along the edges of g.
    """
    n = g.n
    res = phi_lin_graph(g, opts)
    slack = res.solution.S[0]
    x = n * 0.5 * (slack + slack.T)
    # X_ij = -1 exactly on edges of g; clean the roundoff there before factoring
    for i, j in g.edges:
        x[i, j] = x[j, i] = -1.0
    sf = psd_sqrt_factor(x).real
    scale = float(np.trace(x)) / n + 1.0
    vecs = np.zeros((n, n + 1))
    vecs[:, :n] = sf.T
    vecs[:, n] = 1.0
    vecs /= np.sqrt(scale)
    handle = np.zeros(n + 1)
    handle[n] = 1.0
    return VectorRepresentation(vecs, handle, 1.0 / np.sqrt(scale), scale,
                                sorted(g.edges))
