import json

import numpy as np
import pytest

from qgraph import graphs as G
from qgraph.graphs import CapabilityError
from qgraph.invariants import (extract_vector_representation, lovasz_theta, phi_lin_dual,
                               phi_lin_general, phi_lin_graph, phi_quad_general, phi_quad_graph)
from qgraph.linalg import min_eigenvalue
from qgraph.sdp import SolverOptions
from qgraph.systems import (MatricialSystem, conjugate_system, constant_diagonal_system,
                            graph_system, optimal_diag_channel)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])


def test_theta_known_values():
    assert lovasz_theta(G.cycle(5)).value == pytest.approx(np.sqrt(5), abs=1e-7)
    for n in (1, 4, 7):
        assert lovasz_theta(G.empty(n)).value == pytest.approx(n, abs=1e-8)
        assert lovasz_theta(G.complete(n)).value == pytest.approx(1.0, abs=1e-8)
    k11 = G.complete(11).minus_edge(0, 1)
    assert lovasz_theta(k11).value == pytest.approx(1.999999999999876, abs=1e-6)


def test_theta_certificate_feasible():
    g = G.wheel(6)
    res = lovasz_theta(g)
    y = res.certificate
    assert np.trace(y) == pytest.approx(1.0, abs=1e-8)
    assert min_eigenvalue(y) >= -1e-8
    assert max(abs(y[i, j]) for i, j in g.edges) <= 1e-8
    assert res.route == "graph_sdp" and res.gap <= 1e-8


def test_phi_lin_values():
    assert phi_lin_graph(G.path(5)).value == pytest.approx(1.9798, abs=1e-4)
    assert phi_lin_graph(G.star(5)).value == pytest.approx(1.8, abs=1e-4)
    for n in (1, 3, 6):
        assert phi_lin_graph(G.complete(n)).value == pytest.approx(n, abs=1e-8)
        assert phi_lin_graph(G.empty(n)).value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("g", [G.path(5), G.empty(4), G.complete(4), G.cycle(6), G.wheel(5)])
def test_phi_lin_dual_agrees(g):
    p, d = phi_lin_graph(g), phi_lin_dual(g)
    assert d.route == "dual"
    assert abs(p.value - d.value) <= 2e-9 * (1 + p.value)
    y = d.certificate
    n = g.n
    assert min_eigenvalue(y - np.ones((n, n)) / n) >= -1e-8
    assert max((abs(y[i, j]) for i, j in g.edges), default=0.0) <= 1e-8
    # the primal result also carries a dual-feasible Y
    assert np.trace(p.dual_certificate) == pytest.approx(p.value, abs=1e-7)


def test_phi_quad_values():
    assert phi_quad_graph(G.path(5)).value == pytest.approx(1.9593, abs=1e-4)
    assert phi_quad_graph(G.wheel(5)).value == pytest.approx(2.9314, abs=1e-4)
    for n in (1, 3, 5):
        assert phi_quad_graph(G.complete(n)).value == pytest.approx(n, abs=1e-8)
        assert phi_quad_graph(G.empty(n)).value == pytest.approx(1.0, abs=1e-8)


def test_phi_quad_k11_complement_forms():
    g = G.complement(G.complete(11).minus_edge(0, 1))
    exact = phi_quad_graph(g).value
    assert exact == pytest.approx(13 / 11, abs=1e-10)
    # the squared epigraph reproduces the published digits rather than 13/11
    squared = phi_quad_graph(g, SolverOptions(tol_gap=1e-11, tol_feas=1e-11), form="squared")
    assert squared.value == pytest.approx(1.18181791957969, abs=1e-7)
    with pytest.raises(ValueError):
        phi_quad_graph(g, form="cubic")


def _random_feasible(g, rng, sweeps=200):
    """Random PSD matrix pushed into {unit diagonal, zero off g} and blended with I."""
    n = g.n
    z = rng.standard_normal((n, n + 1))
    a = z @ z.T
    mask = np.zeros((n, n), dtype=bool)
    for i, j in g.edges:
        mask[i, j] = mask[j, i] = True

    def affine(m):
        m = np.where(mask, m, 0.0)
        np.fill_diagonal(m, 1.0)
        return m

    for _ in range(sweeps):
        a = affine(a)
        w, v = np.linalg.eigh(a)
        a = (v * np.clip(w, 0, None)) @ v.T
    a = affine(a)
    lam = np.linalg.eigvalsh(a)[0]
    if lam < 0:
        s = -lam / (1 - lam)
        a = (1 - s) * a + s * np.eye(n)
    return a


@pytest.mark.parametrize("g", [G.path(5), G.cycle(5), G.wheel(5), G.star(5)])
def test_phi_quad_certificate_beats_random_feasible(g):
    res = phi_quad_graph(g)
    a_star = res.certificate
    n = g.n
    j = np.ones((n, n))
    assert min_eigenvalue(a_star) >= -1e-8
    assert np.allclose(np.diag(a_star), 1)
    for i, k in g.non_edges():
        assert a_star[i, k] == 0
    best = np.linalg.norm(a_star - j) ** 2
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = _random_feasible(g, rng)
        assert min_eigenvalue(a) >= -1e-10
        assert best <= np.linalg.norm(a - j) ** 2 + 1e-6


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_phi_lin_general_constant_diagonal(n):
    assert phi_lin_general(constant_diagonal_system(n)).value == pytest.approx((2 * n - 1) / n,
                                                                                abs=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_full_system(n):
    s = MatricialSystem.full(n)
    assert phi_lin_general(s).value == pytest.approx(n, abs=1e-6)
    res = phi_quad_general(s)
    assert res.value == pytest.approx(n, abs=1e-6)
    assert np.allclose(res.certificate.choi, _identity_choi(n), atol=1e-6)


def _identity_choi(n):
    c = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            c[i * n + i, j * n + j] = 1
    return c


@pytest.mark.parametrize("n", [2, 3])
def test_phi_quad_general_constant_diagonal_closed_form(n):
    res = phi_quad_general(constant_diagonal_system(n))
    assert res.value == pytest.approx((2 * n - 1) / n, abs=1e-6)
    assert np.max(np.abs(res.certificate.choi - optimal_diag_channel(n).choi)) <= 1e-6
    assert res.certificate.is_quantum_channel(1e-8)


@pytest.mark.parametrize("g", [G.path(5), G.cycle(5), G.star(5), G.path(3), G.cycle(4)])
def test_general_lin_matches_graph_route(g):
    assert phi_lin_general(graph_system(g)).value == pytest.approx(phi_lin_graph(g).value,
                                                                   abs=1e-6)


@pytest.mark.parametrize("g", [G.path(4), G.star(4), G.cycle(4), G.path(3)])
def test_general_quad_matches_graph_route(g):
    gen = phi_quad_general(graph_system(g))
    assert gen.value == pytest.approx(phi_quad_graph(g).value, abs=1e-6)
    assert gen.route == "general_choi"
    assert gen.certificate.is_quantum_channel(1e-8)


def test_complex_systems_match_real_counterparts():
    # diagonal-unitary conjugates of a real system carry the same invariants
    base = MatricialSystem.from_basis(2, [np.eye(2), SX])
    lin, quad = phi_lin_general(base).value, phi_quad_general(base).value
    for b in (SY, SX + SY):
        s = MatricialSystem.from_basis(2, [np.eye(2), b])
        assert phi_lin_general(s).value == pytest.approx(lin, abs=1e-6)
        assert phi_quad_general(s).value == pytest.approx(quad, abs=1e-6)


def test_complex_route_on_conjugated_system():
    x = np.zeros((3, 3))
    x[0, 1] = x[1, 2] = 1.0
    s = MatricialSystem.from_basis(3, [np.eye(3), x, x.T, x @ x, (x @ x).T])
    rng = np.random.default_rng(12)
    u = np.diag(np.exp(2j * np.pi * rng.random(3)))
    t = conjugate_system(s, u)
    assert s.is_real() and not t.is_real()
    assert phi_lin_general(t).value == pytest.approx(phi_lin_general(s).value, abs=1e-6)
    assert phi_quad_general(t).value == pytest.approx(phi_quad_general(s).value, abs=1e-6)


def test_general_route_caps():
    with pytest.raises(CapabilityError):
        phi_quad_general(constant_diagonal_system(5))
    with pytest.raises(CapabilityError):
        phi_lin_general(constant_diagonal_system(7))


@pytest.mark.parametrize("g", [G.path(5), G.cycle(5), G.complete(4), G.empty(4), G.wheel(6)])
def test_vector_representation(g):
    rep = extract_vector_representation(g)
    assert rep.check()
    phi = phi_lin_graph(g).value
    for u in rep.vectors:
        assert rep.handle @ u == pytest.approx(1 / np.sqrt(phi), abs=1e-6)
    assert rep.residuals()["t_vs_phi_lin"] <= 1e-6


def test_vector_representation_empty_graph():
    rep = extract_vector_representation(G.empty(4))
    assert rep.t == pytest.approx(1.0, abs=1e-8)
    # every vector is the handle up to the square root of the solver tolerance
    assert rep.orthogonal_pairs == []
    assert np.allclose(rep.vectors, rep.handle, atol=1e-4)


def test_vector_representation_p5_t():
    assert extract_vector_representation(G.path(5)).t == pytest.approx(1 / np.sqrt(1.9798),
                                                                       abs=1e-4)


def test_result_to_dict_is_json():
    res = phi_quad_general(constant_diagonal_system(2))
    d = res.to_dict(with_certificate=True)
    json.dumps(d)
    assert set(d) >= {"invariant", "value", "gap", "route", "certificate"}
