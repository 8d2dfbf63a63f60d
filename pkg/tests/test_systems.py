import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgraph import graphs as G
from qgraph.channel import ChannelMap, k_norm
from qgraph.linalg import min_eigenvalue
from qgraph.systems import (InvalidSystemError, MatricialSystem, conjugate_system,
                            constant_diagonal_system, graph_system, optimal_diag_channel, tensor)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0])


def span_equal(s, t):
    return s.dim == t.dim and all(t.contains(b) for b in s.basis)


def test_from_basis_examples():
    assert MatricialSystem.from_basis(3, [np.eye(3)]).dim == 1
    assert MatricialSystem.full(3).dim == 9
    with pytest.raises(InvalidSystemError):
        MatricialSystem.from_basis(2, [np.eye(2), np.array([[0, 1], [0, 0]])])
    with pytest.raises(InvalidSystemError):
        MatricialSystem.from_basis(2, [np.diag([1.0, 0.0])])


def test_dependent_inputs_dropped():
    s = MatricialSystem.from_basis(2, [np.eye(2), 2 * np.eye(2), SX, SX + np.eye(2)])
    assert s.dim == 2


def test_orthonormal_basis():
    s = constant_diagonal_system(4)
    gram = np.einsum("kij,lij->kl", s.basis.conj(), s.basis)
    assert np.allclose(gram, np.eye(s.dim), atol=1e-10)
    full = np.concatenate([s.basis, s.complement]).reshape(16, 16)
    assert np.allclose(full.conj() @ full.T, np.eye(16), atol=1e-10)


def test_graph_system_dimensions():
    assert graph_system(G.empty(4)).dim == 4
    assert graph_system(G.complete(4)).dim == 16
    assert graph_system(G.path(3)).dim == 7


def test_constant_diagonal_dimensions():
    assert constant_diagonal_system(1).dim == 1
    assert constant_diagonal_system(2).dim == 3
    assert constant_diagonal_system(3).dim == 7
    s2 = MatricialSystem.from_basis(2, [np.eye(2), SX, SY])
    assert span_equal(constant_diagonal_system(2), s2)


def test_graph_projection_choi():
    g = G.cycle(5)
    n = g.n
    expected = np.zeros((n * n, n * n))
    for i in range(n):
        expected[i * n + i, i * n + i] = 1
    for i, j in g.edges:
        for a, b in ((i, j), (j, i)):
            expected[a * n + a, b * n + b] = 1
    assert np.allclose(graph_system(g).projection_channel().choi, expected, atol=1e-12)


def test_constant_diagonal_projection():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    y = constant_diagonal_system(4).project(x)
    expected = x.copy()
    np.fill_diagonal(expected, np.trace(x) / 4)
    assert np.allclose(y, expected)


def test_full_projection_is_identity():
    assert np.allclose(MatricialSystem.full(3).projection_channel().choi,
                       ChannelMap.identity(3).choi)


@pytest.mark.parametrize("s", [graph_system(G.path(4)), graph_system(G.wheel(5)),
                               constant_diagonal_system(3), MatricialSystem.full(2),
                               MatricialSystem.from_basis(2, [np.eye(2), SY])])
def test_projection_properties(s):
    p = s.projection_channel()
    assert p.is_unital(1e-10) and p.is_trace_preserving(1e-10)
    assert np.allclose(p.compose(p).choi, p.choi, atol=1e-10)
    for b in s.basis:
        assert np.linalg.norm(p(b) - b) <= 1e-10
    for k in s.complement:
        assert np.linalg.norm(p(k)) <= 1e-10
    rng = np.random.default_rng(1)
    x, y = (rng.standard_normal((s.n, s.n)) + 1j * rng.standard_normal((s.n, s.n))
            for _ in range(2))
    assert np.vdot(y, p(x)) == pytest.approx(np.vdot(p(y), x))


def test_membership():
    s = graph_system(G.path(3))
    x = np.array([[1, 2, 0], [3, 4, 5], [0, 6, 7]], dtype=float)
    assert x in s
    x[0, 2] = 1e-3
    assert x not in s
    assert not s.contains(np.eye(2))


@pytest.mark.parametrize("g,h", [(G.path(2), G.path(3)), (G.cycle(4), G.empty(2)),
                                 (G.star(3), G.complete(2))])
def test_tensor_of_graph_systems(g, h):
    t = tensor(graph_system(g), graph_system(h))
    assert span_equal(t, graph_system(G.strong_product(g, h)))


def test_tensor_trivial_cases():
    s = constant_diagonal_system(3)
    scalars = MatricialSystem.from_basis(1, [np.eye(1)])
    assert span_equal(tensor(scalars, s), s)
    assert tensor(MatricialSystem.full(2), MatricialSystem.full(2)).dim == 16


def test_optimal_diag_channel_on_paulis():
    phi = optimal_diag_channel(2)
    assert np.allclose(phi(np.eye(2)), np.eye(2))
    assert np.allclose(phi(SX), SX / 2)
    assert np.allclose(phi(SY), SY / 2)
    assert np.allclose(phi(SZ), 0)
    assert np.allclose(optimal_diag_channel(1).choi, [[1]])


@pytest.mark.parametrize("n", range(1, 7))
def test_optimal_diag_channel_is_channel_into_system(n):
    phi = optimal_diag_channel(n)
    assert phi.is_quantum_channel()
    s = constant_diagonal_system(n)
    rng = np.random.default_rng(n)
    x = rng.standard_normal((n, n))
    assert phi(x) in s


def test_optimal_diag_channel_against_convex_oracle():
    cp = pytest.importorskip("cvxpy")
    n = 2
    s = constant_diagonal_system(n)
    p = s.projection_channel().choi
    c = cp.Variable((4, 4), hermitian=True)
    blk = lambda i, j: c[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    cons = [c >> 0, blk(0, 0) + blk(1, 1) == np.eye(2)]
    cons += [cp.trace(blk(i, j)) == (1 if i == j else 0) for i in range(2) for j in range(2)]
    for i in range(2):
        for j in range(2):
            for k in s.complement:
                cons.append(cp.trace(k.conj().T @ blk(i, j)) == 0)
    pb = lambda m, i, j: m[2 * i:2 * i + 2, 2 * j:2 * j + 2]
    resid = [sum(blk(i, i) for i in range(2)) - sum(pb(p, i, i) for i in range(2))]
    resid += [blk(i, j) - pb(p, i, j) for i in range(2) for j in range(2) if i != j]
    obj = cp.sum([cp.sum_squares(cp.vec(r, order="F")) for r in resid])
    cp.Problem(cp.Minimize(obj), cons).solve(solver="CLARABEL")
    closed = k_norm(optimal_diag_channel(n) - s.projection_channel())
    assert np.sqrt(obj.value) == pytest.approx(closed, abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_conjugate_system_by_diagonal_unitary(seed):
    rng = np.random.default_rng(seed)
    u = np.diag(np.exp(2j * np.pi * rng.random(4)))
    s = graph_system(G.path(4))
    t = conjugate_system(s, u)
    assert t.dim == s.dim
    assert span_equal(t, s)  # graph systems are diagonal-unitary invariant


def test_is_real():
    assert graph_system(G.path(3)).is_real()
    assert constant_diagonal_system(3).is_real()
    # closed under entrywise conjugation although sigma_y itself is not real
    assert MatricialSystem.from_basis(2, [np.eye(2), SY]).is_real()
    assert not MatricialSystem.from_basis(2, [np.eye(2), SX + SY]).is_real()


def test_json_round_trip():
    s = MatricialSystem.from_basis(2, [np.eye(2), SY], label="sy")
    t = MatricialSystem.from_json(s.to_json())
    assert span_equal(s, t) and t.label == "sy"
    with pytest.raises(InvalidSystemError):
        MatricialSystem.from_json('{"n": 2}')
    with pytest.raises(InvalidSystemError):
        MatricialSystem.from_json('{"n": 2, "basis": [[1, 0], [0, 1]]}')


def test_hermitian_complement():
    s = MatricialSystem.from_basis(2, [np.eye(2), SY])
    hs = s.hermitian_complement()
    assert len(hs) == 2
    for h in hs:
        assert np.allclose(h, h.conj().T)
        assert abs(np.vdot(np.eye(2), h)) < 1e-12 and abs(np.vdot(SY, h)) < 1e-12
    assert min_eigenvalue(np.eye(2)) == 1
