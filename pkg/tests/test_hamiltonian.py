import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palatini import hamiltonian as ham
from palatini import lagrangian as lag
from palatini.jets import J1, J1_STAR, P_NONMOMENTA
from palatini.solutions import InvalidParamsError
from palatini.surfaces import sample_jet_point, sample_on_surface
from palatini.tensor import primal

seeds = st.integers(0, 2**31 - 1)


def pf(seed):
    return sample_on_surface("P_f", seed).restrict(P_NONMOMENTA)


def j1(seed):
    return sample_jet_point(seed).restrict(J1)


# ----------------------------------------------------------------- Legendre


def test_minkowski_momenta(minkowski):
    m = ham.extended_legendre(minkowski)
    assert m.z.p_conn[0, 1, 1, 0] == 1.0 and float(m.z.p) == 0.0
    assert np.abs(m.z.p_metric).max() == 0.0


def test_legendre_image_lies_on_constraints():
    p = j1(1)
    assert ham.hamiltonian_constraints(ham.legendre(p)) < 1e-12
    assert ham.legendre(p).layout is J1_STAR


@settings(max_examples=5)
@given(seeds)
def test_legendre_rank_and_kernel(seed):
    res = ham.legendre_rank(j1(seed))
    assert (res.rank, res.kernel_dim) == (78, 296)
    assert res.kernel_outside_velocities < 1e-12 and res.velocities_in_kernel == 0.0


def test_extended_legendre_appends_minus_H():
    p = j1(2)
    m = ham.extended_legendre(p)
    assert abs(float(m.z.p) + float(primal(lag.aux_H(p.z)))) < 1e-12


# ----------------------------------------------------------- projectability


def test_forms_project_to_hamiltonian_forms():
    res = ham.projectability_check(j1(3), np.random.default_rng(3))
    assert max(res.theta_gap, res.omega_gap, res.liouville_gap) < 1e-10


def test_only_torsion_constraint_projects():
    res = ham.constraint_projectability(j1(4))
    assert res["t"] < 1e-12
    assert min(res[f] for f in "cmri") > 1e-3


# ------------------------------------------------------------- field eqs


def test_minimal_params_solve_and_are_tangent():
    q = pf(5)
    params = ham.sample_ham_params(q)
    r4, r5 = ham.ham_residuals_nonmomenta(ham.ham_field_coefficients(q, params), q)
    assert max(np.abs(r4).max(), np.abs(r5).max()) < 1e-9
    assert ham.ham_tangency(q, ham.ham_solution(q, params)) < 1e-8
    assert ham.displayed_k2(q, params) < 1e-8


def test_inadmissible_params_rejected():
    q = pf(6)
    K = np.random.default_rng(6).standard_normal((4,) * 4)
    with pytest.raises(InvalidParamsError):
        ham.ham_solution(q, ham.HamParams(np.zeros((4, 4)), K))


def test_restricted_params_integrate_g_block():
    q = pf(7)
    params = ham.sample_ham_params(q, np.random.default_rng(7), restricted=True)
    assert ham.ham_bracket_blocks(ham.ham_solution(q, params), q)["g"] < 1e-8
    assert ham.displayed_g_restriction(q, params) < 1e-8
    assert ham.displayed_pure_restriction(q, params) < 1e-8


def test_unrestricted_params_leave_g_bracket():
    q = pf(8)
    params = ham.sample_ham_params(q, np.random.default_rng(8))
    assert ham.ham_bracket_blocks(ham.ham_solution(q, params), q)["g"] > 1e-3


# ----------------------------------------------------------- pure chart


@given(seeds)
def test_pure_chart_lemma(seed):
    res = ham.lemma_mc_check(pf(seed))
    assert max(res.volume_ratio, res.inverse_gap, res.inverse_gap_T, res.momenta_gap) < 1e-10
    assert res.round_trip < 1e-10


def test_pure_hamiltonian_agrees():
    q = pf(9)
    assert abs(ham.H_pure(ham.to_pure(q)) - float(primal(lag.aux_H(q.z)))) < 1e-11


def test_pure_forms():
    res = ham.pure_chart_check(pf(10), np.random.default_rng(10))
    assert max(res.H_gap, res.displayed_gap, res.pullback_gap) < 1e-10


def test_degenerate_pure_momenta_rejected():
    r = ham.to_pure(pf(11))
    flat = r.flat.copy()
    flat[r.layout.slices["p_sym"]] = 0.0
    with pytest.raises(ham.SingularMetricError):
        ham.from_pure(type(r)(r.layout, flat))


def test_pure_solutions():
    q = pf(12)
    res = ham.pure_solution_check(q, ham.sample_ham_params(q, np.random.default_rng(12)))
    assert max(res.hfun1, res.hfun2, res.contraction, res.chart_velocity_gap) < 1e-9


def test_zeta_equivalence():
    res = ham.zeta_equivalence_check(ham.to_pure(pf(13)), np.random.default_rng(13), tuples=5)
    assert max(res.form_gap, res.round_trip, res.constraint, res.identity_blocks) < 1e-10


# ------------------------------------------------------------------ gauge


def test_gauge_fields_in_both_charts():
    res = ham.ham_gauge_checks(pf(14), np.random.default_rng(14).standard_normal(4), np.random.default_rng(0))
    assert max(res.values()) < 1e-8, res


def test_torsion_candidate_fails_with_twice_its_size():
    from palatini.solutions import torsion_candidate

    K = torsion_candidate(np.random.default_rng(15))
    val, bound = ham.ham_torsion_candidate_check(pf(15), K)
    assert abs(val - bound) < 1e-10 and bound > 0
