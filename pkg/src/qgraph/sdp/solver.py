"""Primal-dual interior-point solver for block-diagonal SDPs.

Infeasible path following with the HKM search direction and a Mehrotra
predictor-corrector step. Only real symmetric data reaches the iteration;
complex programs go through :func:`complex_to_real` first and the answer is
mapped back.

Constraint blocks are held either as a dense stack or, when every matrix in a
block is given in :class:`LowRank` form, as factors. The low-rank form makes
the Schur complement of arrow-shaped epigraph blocks cheap.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .problem import LowRank, SdpProblem, complex_to_real, svec, unrealify

FRACTION_TO_BOUNDARY = 0.98
DEPENDENCY_TOL = 1e-10
DIVERGENCE_LIMIT = 1e12
# rows this small relative to the largest are roundoff, not constraints
ZERO_ROW_TOL = 1e-13


class DependentConstraintWarning(RuntimeWarning):
    """Linearly dependent equality constraints were dropped."""


class SdpNumericalError(RuntimeError):
    """The iteration broke down before reaching the requested accuracy."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


@dataclass
class SolverOptions:
    tol_gap: float = 1e-9
    tol_feas: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not (self.tol_gap > 0 and self.tol_feas > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @classmethod
    def from_env(cls, **overrides) -> "SolverOptions":
        """Defaults, then ``QG_TOL_GAP`` from the environment, then explicit values."""
        kw = {}
        env = os.environ.get("QG_TOL_GAP")
        if env:
            kw["tol_gap"] = float(env)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


@dataclass
class SdpSolution:
    X: list
    y: np.ndarray
    S: list
    primal_obj: float
    dual_obj: float
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    complementarity: float
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return abs(self.primal_obj - self.dual_obj)

    @property
    def value(self) -> float:
        return self.primal_obj

    def weak_duality_violations(self, tol: float = 1e-9) -> list[int]:
        """Iterations at which both residuals were small yet the duality gap had the wrong sign."""
        bad = []
        for h in self.history:
            if h["pinf"] <= tol and h["dinf"] <= tol:
                scale = 1.0 + abs(h["pobj"])
                wrong = (h["pobj"] - h["dobj"] if h["sense"] == "max" else h["dobj"] - h["pobj"])
                if wrong > tol * scale:
                    bad.append(h["iter"])
        return bad


# ---------------------------------------------------------------------------
# block operators


class _DenseBlock:
    def __init__(self, rows: np.ndarray, mats: np.ndarray):
        self.rows = rows
        self.mats = mats
        self.flat = mats.reshape(len(rows), -1)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return self.flat @ X.ravel()

    def adjoint(self, yr: np.ndarray) -> np.ndarray:
        return (yr @ self.flat).reshape(self.mats.shape[1:])

    def schur(self, W: np.ndarray, V: np.ndarray) -> np.ndarray:
        g = np.matmul(np.matmul(V, self.mats), W)
        return self.flat @ g.reshape(len(self.rows), -1).T

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.flat, axis=1)

    def cost(self) -> float:
        m, n = len(self.rows), self.mats.shape[1]
        return 4.0 * m * n ** 3 + 2.0 * m * m * n * n


class _LowRankBlock:
    def __init__(self, rows: np.ndarray, F: np.ndarray, E: np.ndarray):
        self.rows = rows
        self.F = F                  # n x R factor columns
        self.E = E                  # R x m_k: weight of factor r in constraint j

    def apply(self, X: np.ndarray) -> np.ndarray:
        vals = np.einsum("ar,ar->r", X @ self.F, self.F)
        return vals @ self.E

    def adjoint(self, yr: np.ndarray) -> np.ndarray:
        coeff = self.E @ yr
        return (self.F * coeff) @ self.F.T

    def schur(self, W: np.ndarray, V: np.ndarray) -> np.ndarray:
        P = self.F.T @ W @ self.F
        Q = self.F.T @ V @ self.F
        return self.E.T @ (P * Q) @ self.E

    def row_norms(self) -> np.ndarray:
        g = (self.F.T @ self.F) ** 2
        return np.sqrt(np.maximum(np.einsum("rj,rs,sj->j", self.E, g, self.E), 0.0))

    def cost(self) -> float:
        n, R = self.F.shape
        return 4.0 * n * n * R + 2.0 * n * R * R + 2.0 * R * R * self.E.shape[1]


def _block_operator(problem: SdpProblem, k: int, keep: np.ndarray, scale: np.ndarray):
    rows = np.array([i for i in keep if problem.A[i][k] is not None], dtype=int)
    n = problem.block_dims[k]
    if rows.size == 0:
        return None
    entries = [problem.A[i][k] for i in rows]
    if all(isinstance(a, LowRank) for a in entries):
        F = np.hstack([a.factors.real for a in entries])
        E = np.zeros((F.shape[1], rows.size))
        pos = 0
        for j, (i, a) in enumerate(zip(rows, entries)):
            r = a.weights.size
            E[pos:pos + r, j] = a.weights / scale[i]
            pos += r
        lr = _LowRankBlock(rows, F, E)
        mats = None
        # fall back to dense storage when it is cheaper and small
        if rows.size * n * n <= 2_000_000:
            dense_cost = 4.0 * rows.size * n ** 3 + 2.0 * rows.size ** 2 * n * n
            if dense_cost < lr.cost():
                mats = np.stack([a.dense().real / scale[i] for i, a in zip(rows, entries)])
        return lr if mats is None else _DenseBlock(rows, mats)
    mats = np.empty((rows.size, n, n))
    for j, (i, a) in enumerate(zip(rows, entries)):
        d = a.dense() if isinstance(a, LowRank) else a
        mats[j] = np.real(d) / scale[i]
    return _DenseBlock(rows, mats)


def _row_norms(problem: SdpProblem) -> np.ndarray:
    out = np.zeros(problem.m)
    for i, row in enumerate(problem.A):
        s = 0.0
        for a in row:
            if a is None:
                continue
            if isinstance(a, LowRank):
                s += a.fro_inner(a)
            else:
                s += float(np.sum(np.abs(a) ** 2))
        out[i] = np.sqrt(max(s, 0.0))
    return out


def _independent_rows(problem: SdpProblem, candidates: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Pivoted QR on the (normalized) constraint rows; returns the kept indices."""
    if candidates.size <= 1:
        return candidates
    dims = problem.block_dims
    sizes = [n * (n + 1) // 2 for n in dims]
    offs = np.cumsum([0] + sizes)
    mat = np.zeros((candidates.size, offs[-1]))
    for r, i in enumerate(candidates):
        for k, a in enumerate(problem.A[i]):
            if a is not None:
                d = a.dense() if isinstance(a, LowRank) else a
                mat[r, offs[k]:offs[k + 1]] = svec(np.real(d)) / scale[i]
    rhs = problem.b[candidates] / scale[candidates]
    _, R, piv = scipy.linalg.qr(mat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > DEPENDENCY_TOL * max(diag[0], 1e-300))) if diag.size else 0
    keep = np.sort(piv[:rank])
    if rank < candidates.size:
        dropped = np.setdiff1d(np.arange(candidates.size), keep)
        coef, *_ = np.linalg.lstsq(mat[keep].T, mat[dropped].T, rcond=None)
        resid = rhs[dropped] - coef.T @ rhs[keep]
        if np.max(np.abs(resid)) > 1e-8 * (1.0 + np.max(np.abs(rhs))):
            raise ValueError("linearly dependent constraints with inconsistent right-hand sides")
        warnings.warn(f"dropped {dropped.size} linearly dependent constraint(s)",
                      DependentConstraintWarning,
                      stacklevel=4)
    return candidates[keep]


# ---------------------------------------------------------------------------
# the iteration


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest ``a`` with ``X + a dX`` positive semidefinite (``inf`` if unbounded)."""
    L = np.linalg.cholesky(X)
    T = scipy.linalg.solve_triangular(L, dX, lower=True)
    T = scipy.linalg.solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _inv_spd(S: np.ndarray) -> np.ndarray:
    c = scipy.linalg.cho_factor(S, lower=True)
    return _sym(scipy.linalg.cho_solve(c, np.eye(S.shape[0])))


class _Engine:
    def __init__(self, problem: SdpProblem, opts: SolverOptions):
        self.problem = problem
        self.opts = opts
        self.sign = 1.0 if problem.sense == "max" else -1.0
        self.dims = problem.block_dims
        self.m = problem.m
        norms = _row_norms(problem)
        zero = norms <= ZERO_ROW_TOL * max(float(norms.max(initial=0.0)), 1.0)
        if np.any(zero & (np.abs(problem.b) > ZERO_ROW_TOL * (1.0 + np.abs(problem.b).max(initial=0.0)))):
            raise ValueError("a constraint with zero matrix has a nonzero right-hand side")
        scale = np.where(zero, 1.0, norms)
        keep = np.flatnonzero(~zero)
        if not problem.independent:
            keep = _independent_rows(problem, keep, scale)
        self.keep = keep
        self.scale = scale
        # reindex kept constraints 0..mk-1
        self.b = problem.b[keep] / scale[keep]
        self.mk = keep.size
        local = {int(i): j for j, i in enumerate(keep)}
        self.ops = []
        for k in range(len(self.dims)):
            op = _block_operator(problem, k, keep, scale)
            if op is not None:
                op.rows = np.array([local[int(i)] for i in op.rows], dtype=int)
            self.ops.append(op)
        self.C = [self.sign * np.real(c) for c in problem.C]

    def A(self, X: list) -> np.ndarray:
        out = np.zeros(self.mk)
        for op, x in zip(self.ops, X):
            if op is not None:
                out[op.rows] += op.apply(x)
        return out

    def AT(self, y: np.ndarray) -> list:
        out = []
        for op, n in zip(self.ops, self.dims):
            out.append(np.zeros((n, n)) if op is None else op.adjoint(y[op.rows]))
        return out

    def schur(self, X: list, Sinv: list) -> np.ndarray:
        M = np.zeros((self.mk, self.mk))
        for op, x, v in zip(self.ops, X, Sinv):
            if op is not None:
                M[np.ix_(op.rows, op.rows)] += op.schur(x, v)
        return _sym(M)

    def initial_point(self):
        X, S = [], []
        bnorm = np.abs(self.b)
        for k, n in enumerate(self.dims):
            op = self.ops[k]
            anorm = np.zeros(0) if op is None else op.row_norms()
            xi = max(10.0, np.sqrt(n))
            if op is not None and op.rows.size:
                xi = max(xi, n * np.max((1.0 + bnorm[op.rows]) / (1.0 + anorm)))
            eta = max(10.0, np.sqrt(n), np.linalg.norm(self.C[k]),
                      np.max(anorm) if anorm.size else 0.0)
            X.append(xi * np.eye(n))
            S.append(eta * np.eye(n))
        return X, np.zeros(self.mk), S

    def direction(self, X, Sinv, Mfac, rp, Rd, Rc):
        rhs = self.A([rc + x @ rd @ v for rc, x, rd, v in zip(Rc, X, Rd, Sinv)]) - rp
        dy = self._msolve(Mfac, rhs)
        ATdy = self.AT(dy)
        dS = [a - rd for a, rd in zip(ATdy, Rd)]
        dX = [_sym(rc - x @ ds @ v) for rc, x, ds, v in zip(Rc, X, dS, Sinv)]
        return dX, dy, dS

    def _msolve(self, Mfac, rhs):
        if self.mk == 0:
            return np.zeros(0)
        kind, fac = Mfac
        if kind == "chol":
            return scipy.linalg.cho_solve(fac, rhs)
        return fac @ rhs

    def _mfactor(self, M):
        if self.mk == 0:
            return ("none", None)
        try:
            return ("chol", scipy.linalg.cho_factor(M, lower=True))
        except np.linalg.LinAlgError:
            pass
        reg = 1e-14 * max(1.0, np.max(np.abs(np.diag(M))))
        try:
            return ("chol", scipy.linalg.cho_factor(M + reg * np.eye(self.mk), lower=True))
        except np.linalg.LinAlgError:
            return ("pinv", np.linalg.pinv(M, rcond=1e-15, hermitian=True))

    def run(self) -> SdpSolution:
        opts = self.opts
        N = float(sum(self.dims))
        X, y, S = self.initial_point()
        bnorm = 1.0 + np.linalg.norm(self.b)
        cnorm = 1.0 + np.sqrt(sum(np.linalg.norm(c) ** 2 for c in self.C))
        history = []
        best, best_merit = None, np.inf
        status, reason = "max_iter", "iteration limit reached"
        it = 0
        for it in range(opts.max_iter + 1):
            rp = self.b - self.A(X)
            ATy = self.AT(y)
            Rd = [c - a + s for c, a, s in zip(self.C, ATy, S)]
            pobj = sum(float(np.vdot(c, x)) for c, x in zip(self.C, X))
            dobj = float(self.b @ y)
            xs = sum(float(np.vdot(x, s)) for x, s in zip(X, S))
            mu = xs / N
            pinf = np.linalg.norm(rp) / bnorm
            dinf = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / cnorm
            relgap = max(abs(pobj - dobj), abs(xs)) / (1.0 + abs(pobj))
            history.append(dict(iter=it, pobj=self.sign * pobj, dobj=self.sign * dobj,
                                pinf=pinf, dinf=dinf, mu=mu,
                                sense=self.problem.sense))
            merit = max(relgap / opts.tol_gap, pinf / opts.tol_feas, dinf / opts.tol_feas)
            if merit < best_merit:
                best_merit = merit
                best = ([x.copy() for x in X], y.copy(), [s.copy() for s in S], it)
            if merit <= 1.0:
                status, reason = "optimal", ""
                break
            big = max(max(np.max(np.abs(x)) for x in X), max(np.max(np.abs(s)) for s in S),
                      np.max(np.abs(y)) if y.size else 0.0)
            if big > DIVERGENCE_LIMIT:
                status, reason = "infeasible_suspected", "iterates diverged"
                break
            if it == opts.max_iter:
                break
            try:
                Sinv = [_inv_spd(s) for s in S]
                Mfac = self._mfactor(self.schur(X, Sinv))
                # predictor
                dXa, dya, dSa = self.direction(X, Sinv, Mfac, rp, Rd, [-x for x in X])
                ap = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(x, d) for x, d in zip(X, dXa)))
                ad = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(s, d) for s, d in zip(S, dSa)))
                mu_aff = sum(float(np.vdot(x + ap * dx, s + ad * ds))
                             for x, dx, s, ds in zip(X, dXa, S, dSa)) / N
                sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
                # corrector
                Rc = [sigma * mu * v - x - dx @ ds @ v
                      for v, x, dx, ds in zip(Sinv, X, dXa, dSa)]
                dX, dy, dS = self.direction(X, Sinv, Mfac, rp, Rd, Rc)
                ap = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(x, d) for x, d in zip(X, dX)))
                ad = min(1.0, FRACTION_TO_BOUNDARY * min(_max_step(s, d) for s, d in zip(S, dS)))
            except np.linalg.LinAlgError:
                reason = "loss of positive definiteness"
                status = "breakdown"
                break
            if ap < 1e-14 and ad < 1e-14:
                status, reason = "breakdown", "step length collapsed"
                break
            X = [_sym(x + ap * d) for x, d in zip(X, dX)]
            S = [_sym(s + ad * d) for s, d in zip(S, dS)]
            y = y + ad * dy
            history[-1].update(alpha_p=ap, alpha_d=ad, sigma=sigma)

        if status in ("breakdown", "max_iter"):
            X, y, S, _ = best
            if best_merit <= 1.0:
                status = "optimal"
        sol = self._package(X, y, S, status, it, history)
        if status == "breakdown":
            raise SdpNumericalError(f"SDP solve broke down: {reason}", sol)
        return sol

    def _package(self, X, y, S, status, it, history) -> SdpSolution:
        p = self.problem
        yfull = np.zeros(self.m)
        yfull[self.keep] = y / self.scale[self.keep]
        yfull *= self.sign
        pobj = self.sign * sum(float(np.vdot(c, x)) for c, x in zip(self.C, X)) + p.offset
        dobj = float(p.b @ yfull) + p.offset
        rp = p.b - p.constraint_values(X)
        ATy = [self.sign * a for a in self.AT(y)]
        # max: S = A^T y - C ; min: S = C - A^T y
        if p.sense == "max":
            Rd = [a - np.real(c) - s for a, c, s in zip(ATy, p.C, S)]
        else:
            Rd = [np.real(c) - a - s for a, c, s in zip(ATy, p.C, S)]
        dres = max((np.max(np.abs(r)) for r in Rd), default=0.0)
        compl = sum(float(np.vdot(x, s)) for x, s in zip(X, S))
        return SdpSolution(
            X=X, y=yfull, S=S, primal_obj=pobj, dual_obj=dobj,
            status="optimal" if status == "optimal" else status,
            iterations=it, primal_residual=float(np.max(np.abs(rp))) if rp.size else 0.0,
            dual_residual=float(dres), complementarity=compl, history=history)


def _solve_real(problem: SdpProblem, opts: SolverOptions) -> SdpSolution:
    return _Engine(problem, opts).run()


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve ``problem``; complex blocks are handled through the real reduction.

    Returns the best iterate with ``status`` one of ``optimal``, ``max_iter`` or
    ``infeasible_suspected``. Raises :class:`SdpNumericalError` on breakdown
    short of the requested tolerances.
    """
    opts = options or SolverOptions()
    if problem.is_real:
        return _solve_real(problem, opts)
    flags = problem.complex_blocks
    real = complex_to_real(problem)
    # the reduction doubles the objective scale; keep relative tolerances as given
    try:
        sol = _solve_real(real, opts)
    except SdpNumericalError as exc:
        if exc.solution is not None:
            exc.solution = _unrealify_solution(problem, exc.solution, flags)
        raise
    return _unrealify_solution(problem, sol, flags)


def _unrealify_solution(problem: SdpProblem, sol: SdpSolution, flags) -> SdpSolution:
    X = [unrealify(x) if f else x for x, f in zip(sol.X, flags)]
    S = [unrealify(s) if f else 0.5 * s for s, f in zip(sol.S, flags)]
    y = sol.y[:problem.m]
    pobj = problem.objective(X)
    dobj = float(problem.b @ y) + problem.offset
    rp = problem.b - problem.constraint_values(X)
    hist = [dict(h, pobj=0.5 * h["pobj"], dobj=0.5 * h["dobj"]) for h in sol.history]
    return SdpSolution(
        X=X, y=y, S=S, primal_obj=pobj, dual_obj=dobj, status=sol.status,
        iterations=sol.iterations,
        primal_residual=float(np.max(np.abs(rp))) if rp.size else 0.0,
        dual_residual=0.5 * sol.dual_residual, complementarity=0.5 * sol.complementarity,
        history=hist)
