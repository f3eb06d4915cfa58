import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from palatini.jets import J1, Coords, jet_gradient, sparse_gradient
from palatini.lagrangian import aux_H
from palatini.surfaces import random_lorentzian, sample_jet_point
from palatini.tensor import (
    DELTA,
    ETA,
    Dual,
    SingularMetricError,
    Tensor,
    antisymmetrize_pair,
    contract,
    det,
    einsum,
    inv,
    jacobian,
    metric_aux,
    primal,
    symmetrize_pair,
)

seeds = st.integers(0, 2**31 - 1)


def test_eta_is_an_involution():
    assert np.array_equal(contract("ab,bc->ac", ETA, ETA), np.eye(4))


def test_trace_of_identity():
    assert contract("ab,ab->", DELTA, DELTA) == 4.0


def test_contraction_matches_triple_loop():
    rng = np.random.default_rng(0)
    T, S = rng.standard_normal((4, 4, 4)), rng.standard_normal((4, 4))
    loop = [sum(T[a, b, c] * S[b, c] for b in range(4) for c in range(4)) for a in range(4)]
    assert np.allclose(contract("abc,bc->a", T, S), loop, atol=1e-13)


def test_contraction_rejects_bad_specs():
    with pytest.raises(ValueError, match="rank"):
        contract("abc,bc->a", np.zeros((4, 4)), np.zeros((4, 4)))
    with pytest.raises(ValueError, match="twice"):
        contract("ab,bc,bd->a", np.eye(4), np.eye(4), np.eye(4))
    with pytest.raises(ValueError, match="operands"):
        contract("ab->a", np.eye(4), np.eye(4))


def test_tensor_enforces_declared_symmetry():
    Tensor(np.eye(4), (((0, 1), "symmetric"),))
    with pytest.raises(ValueError, match="does not hold"):
        Tensor(np.arange(16.0).reshape(4, 4), (((0, 1), "symmetric"),))
    with pytest.raises(ValueError, match="shape"):
        Tensor(np.zeros((3, 3)))


def test_antisymmetrizer_kills_symmetric_input():
    s = np.random.default_rng(1).standard_normal((4, 4))
    assert np.array_equal(antisymmetrize_pair(s + s.T, (0, 1)), np.zeros((4, 4)))


def test_antisymmetrized_connection_is_torsion():
    G = np.random.default_rng(2).standard_normal((4, 4, 4))
    assert np.array_equal(antisymmetrize_pair(G, (1, 2)), G - G.transpose(0, 2, 1))


def test_antisymmetrizer_twice_doubles():
    G = np.random.default_rng(3).standard_normal((4, 4, 4))
    once = antisymmetrize_pair(G, (1, 2))
    assert np.allclose(antisymmetrize_pair(once, (1, 2)), 2 * once)


def test_antisymmetrizer_rejects_bad_axes():
    with pytest.raises(ValueError):
        antisymmetrize_pair(np.zeros((4, 4)), (0, 0))
    with pytest.raises(ValueError):
        antisymmetrize_pair(np.zeros((4, 4)), (0, 2))


def test_antisymmetrizer_returns_declared_tensor():
    t = antisymmetrize_pair(Tensor(np.random.default_rng(4).standard_normal((4, 4))), (0, 1))
    assert t.symmetries == (((0, 1), "antisymmetric"),)


def test_metric_aux_minkowski():
    ginv, rho = metric_aux(ETA)
    assert np.array_equal(ginv, ETA) and rho == 1.0


def test_metric_aux_diagonal():
    ginv, rho = metric_aux(np.diag([-4.0, 1, 1, 1]))
    assert np.allclose(ginv, np.diag([-0.25, 1, 1, 1])) and np.isclose(rho, 2.0)


def test_metric_aux_singular():
    with pytest.raises(SingularMetricError):
        metric_aux(np.diag([0.0, 1, 1, 1]))


def test_gradient_of_coordinate_function():
    p = sample_jet_point(5).restrict(J1)
    assert sparse_gradient(lambda z: z.g[0, 0], p) == {"g_00": 1.0}


def test_gradient_of_rho_at_minkowski(minkowski):
    def rho(z):
        return metric_aux(z.g)[1]

    grad = sparse_gradient(rho, minkowski)
    # d rho / d g_ab = 1/2 rho g^ab per independent coordinate, doubled off the diagonal
    expected = {"g_00": -0.5, "g_11": 0.5, "g_22": 0.5, "g_33": 0.5}
    assert grad.keys() == expected.keys()
    assert all(np.isclose(grad[k], v, atol=1e-15) for k, v in expected.items())


def test_gradient_of_H_matches_finite_differences():
    p = sample_jet_point(6).restrict(J1)
    _, grad = jet_gradient(aux_H, p)
    grad = np.asarray(primal(grad))
    h = 1e-6
    for i in range(0, J1.size, 7):
        up, dn = p.flat.copy(), p.flat.copy()
        up[i] += h
        dn[i] -= h
        fd = (float(primal(aux_H(Coords(J1, up)))) - float(primal(aux_H(Coords(J1, dn))))) / (2 * h)
        assert abs(fd - grad[i]) <= 1e-6 * max(1.0, abs(grad[i]))


def test_nested_duals_give_second_derivatives():
    # f(x, y) = x^2 y: d2f/dx dy = 2x
    def f(v):
        return v[0] * v[0] * v[1]

    x = np.array([1.5, -0.5])

    def grad(w):
        return jacobian(f, w)[1]

    _, hess = jacobian(grad, x)
    assert np.allclose(primal(hess), [[2 * x[1], 2 * x[0]], [2 * x[0], 0.0]])


def test_inverse_and_determinant_derivatives():
    g = random_lorentzian(np.random.default_rng(7))
    v = np.random.default_rng(8).standard_normal((4, 4))
    v = v + v.T
    _, dinv = jacobian(lambda w: inv(np.reshape(g, (4, 4)) + w[0] * v), np.zeros(1))
    _, ddet = jacobian(lambda w: det(np.reshape(g, (4, 4)) + w[0] * v), np.zeros(1))
    gi = np.linalg.inv(g)
    assert np.allclose(dinv[..., 0], -gi @ v @ gi, atol=1e-12)
    assert np.isclose(ddet[0], np.linalg.det(g) * np.trace(gi @ v))


@given(seeds, st.floats(-10, 10))
def test_contraction_is_multilinear(seed, lam):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((4, 4, 4)), rng.standard_normal((4, 4))
    base = contract("abc,bc->a", A, B)
    assert np.allclose(contract("abc,bc->a", lam * A, B), lam * base, rtol=1e-12, atol=1e-12)
    assert np.allclose(contract("abc,bc->a", A, lam * B), lam * base, rtol=1e-12, atol=1e-12)


@given(seeds)
def test_antisymmetrizer_after_symmetrizer_vanishes(seed):
    t = np.random.default_rng(seed).standard_normal((4, 4, 4))
    assert np.array_equal(antisymmetrize_pair(symmetrize_pair(t, (0, 2)), (0, 2)), np.zeros((4, 4, 4)))


@given(seeds)
def test_gradient_leibniz_rule(seed):
    p = sample_jet_point(seed).restrict(J1)

    def f(z):
        return aux_H(z)

    def g(z):
        return einsum("abc,abc->", z.Gamma, z.dGamma[..., 0])

    _, df = jet_gradient(f, p)
    _, dg = jet_gradient(g, p)
    _, dfg = jet_gradient(lambda z: f(z) * g(z), p)
    fv, gv = float(primal(f(p.z))), float(primal(g(p.z)))
    lhs, rhs = np.asarray(dfg), gv * np.asarray(df) + fv * np.asarray(dg)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(rhs).max())


@given(seeds)
def test_metric_round_trip(seed):
    g = random_lorentzian(np.random.default_rng(seed))
    ginv, _ = metric_aux(g)
    assert np.abs(np.linalg.inv(ginv) - g).max() <= 1e-12 * max(1.0, np.abs(g).max()) * np.linalg.cond(g)
    assert np.abs(ginv @ g - np.eye(4)).max() <= 1e-12 * np.linalg.cond(g)


def test_dual_indexing_and_arithmetic():
    d = Dual(np.arange(4.0), np.eye(4), 1)
    e = (d * d - d / (d + 1.0))[2]
    assert isinstance(e, Dual)
    assert np.isclose(e.val, 4 - 2 / 3) and np.isclose(e.der[2], 4 - 1 / 9)
