import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palatini import bridge
from palatini import hamiltonian as ham
from palatini.jets import P_NONMOMENTA, SIGMA_J1, Point
from palatini.surfaces import random_lorentzian, sample_on_surface
from palatini.tensor import ETA, PAIRS, SingularMetricError, primal

PR, PC = np.array(PAIRS).T
seeds = st.integers(0, 2**31 - 1)


def pf(seed):
    return sample_on_surface("P_f", seed).restrict(P_NONMOMENTA)


def random_metric(rng, m):
    eta = np.diag([-1.0] + [1.0] * (m - 1))
    while True:
        lam = rng.uniform(-1, 1, (m, m))
        if abs(np.linalg.det(lam)) > 0.1:
            g = lam.T @ eta @ lam
            return 0.5 * (g + g.T)


def random_dg(rng, m=4):
    dg = rng.uniform(-1, 1, (m, m, m))
    return dg + dg.transpose(1, 0, 2)


# --------------------------------------------------------- first-order L


def test_flat_first_order_lagrangian_vanishes():
    assert float(primal(bridge.lagrangian_bar_of(ETA, np.zeros((4, 4, 4))))) == 0.0


@given(seeds)
def test_first_order_lagrangian_two_routes(seed):
    rng = np.random.default_rng(seed)
    g, dg = random_lorentzian(rng), random_dg(rng)
    a = float(primal(bridge.lagrangian_bar_of(g, dg)))
    b = bridge.lagrangian_bar_assembled(g, dg)
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_first_order_lagrangian_is_quadratic():
    rng = np.random.default_rng(1)
    g, dg = random_lorentzian(rng), random_dg(rng)
    a = float(primal(bridge.lagrangian_bar_of(g, dg)))
    e = float(primal(bridge.energy_bar_of(g, dg)))
    assert abs(a - e) <= 1e-9 * max(1.0, abs(a))
    assert abs(float(primal(bridge.lagrangian_bar_of(g, 2 * dg))) - 4 * a) <= 1e-9 * max(1.0, abs(a))


def test_levi_civita_is_metric_compatible():
    rng = np.random.default_rng(2)
    g, dg = random_lorentzian(rng), random_dg(rng)
    assert bridge.metricity_residual(g, dg, np.asarray(primal(bridge.levi_civita(g, dg)))) < 1e-12


# -------------------------------------------------------- reconstruction


@pytest.mark.parametrize("m", [3, 4, 5])
def test_reconstruction_in_dimension(m):
    rng = np.random.default_rng(m)
    g, dg, C = random_metric(rng, m), random_dg(rng, m), rng.uniform(-1, 1, m)
    G = bridge.reconstruct_connection(g, dg, C, m)
    assert max(bridge.reconstruction_residuals(g, dg, C, G).values()) < 1e-10


def test_reconstruction_rejects_bad_dimensions():
    with pytest.raises(bridge.DimensionError):
        bridge.reconstruct_connection(np.eye(1), np.zeros((1, 1, 1)), np.zeros(1))
    with pytest.raises(bridge.DimensionError):
        bridge.reconstruct_connection(np.eye(3), np.zeros((3, 3, 3)), np.zeros(3), m=4)
    with pytest.raises(SingularMetricError):
        bridge.reconstruct_connection(np.zeros((4, 4)), np.zeros((4, 4, 4)), np.zeros(4))


def test_flat_metric_reconstructs_pure_trace():
    s = Point(SIGMA_J1, np.concatenate([np.zeros(4), ETA[PR, PC], np.zeros(40)]))
    G = bridge.reconstruct_from_sigma(s, [4.0, 0, 0, 0]).Gamma
    assert np.array_equal(G, np.einsum("b,ac->abc", [1.0, 0, 0, 0], np.eye(4)))


# ---------------------------------------------------------------- xi map


def test_xi_round_trip():
    q = pf(3)
    back = bridge.reconstruct_from_sigma(bridge.xi_map(q), np.einsum("ala->l", q.Gamma))
    assert np.abs(back.flat - q.flat).max() < 1e-10


@given(seeds, st.floats(-10, 10))
def test_xi_ignores_trace_gauge(seed, t):
    q = pf(seed % 1000)
    C = t * np.random.default_rng(seed).standard_normal(4)
    assert np.abs(bridge.xi_map(bridge.gauge_shift(q, C)).flat - bridge.xi_map(q).flat).max() < 1e-12 * max(1, abs(t))


def test_xi_kernel_is_the_trace_directions():
    res = bridge.kernel_and_rank_checks(pf(4))
    assert (res.rank, res.kernel_dim, res.t_rank, res.tangent_dim) == (54, 4, 20, 58)
    assert res.kernel_angle < 1e-9


def test_subspace_gap():
    e = np.eye(4)
    assert bridge.subspace_gap(e[:, :2], e[:, [1, 0]]) < 1e-15
    assert abs(bridge.subspace_gap(e[:, :1], e[:, 1:2]) - 1.0) < 1e-15
    assert bridge.subspace_gap(e[:, :1], e[:, :2]) == 1.0


# ------------------------------------------------------- form equivalence


def test_forms_agree_on_final_surface():
    res = bridge.form_equivalence_check(pf(5), np.random.default_rng(5), tuples=10)
    assert res.deviation < 1e-8 and res.kernel_value < 1e-8 and res.scale > 1e-3


def test_forms_differ_off_the_surface_directions():
    assert bridge.form_equivalence_offsurface(pf(6), np.random.default_rng(6)) > 1e-3


# ------------------------------------------------------- comparison table


def test_comparison_table_with_restricted_params():
    q = pf(7)
    params = ham.sample_ham_params(q, np.random.default_rng(7), restricted=True)
    res = bridge.comparison_table_check(q, params)
    assert max(res.values()) < 1e-8, res


def test_comparison_table_needs_unit_coefficient():
    q = pf(8)
    params = ham.sample_ham_params(q, np.random.default_rng(8), restricted=True)
    res = bridge.comparison_table_check(q, params, coefficient=0.5)
    assert max(res["pair_symmetry"], res["derivative_symmetry"], res["trace_equation"]) > 1e-3


# ---------------------------------------------------------- integrability


def test_frame_of_metric():
    g = random_lorentzian(np.random.default_rng(9))
    J = bridge.frame_of(g)
    assert np.abs(J.T @ ETA @ J - g).max() < 1e-12
    with pytest.raises(ValueError):
        bridge.frame_of(np.eye(4))


def test_integrability_witness():
    res = bridge.integrability_witness(pf(10), np.random.default_rng(10), probes=5)
    assert res.center < 1e-12 and res.constraints < 1e-7


@settings(max_examples=5)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_flat_germ_at_minkowski_is_constant(c0, c1):
    C = np.array([c0, c1, 0.0, 0.0])
    q = bridge.reconstruct_from_sigma(Point(SIGMA_J1, np.concatenate([np.zeros(4), ETA[PR, PC], np.zeros(40)])), C)
    germ = bridge.flat_germ(q)
    p = germ.jet(np.array([0.3, -0.2, 0.1, 0.05]))
    assert np.abs(p.g - ETA).max() < 1e-14 and np.abs(p.dGamma).max() < 1e-14
    assert np.abs(p.Gamma - q.Gamma).max() < 1e-14
