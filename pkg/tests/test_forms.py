import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from palatini.forms import (
    Form,
    MultiVector4,
    VectorField,
    alternating_oracle,
    bracket,
    contract_form,
    d2x_terms,
    d3x_terms,
    lie_derivative_fn,
    pushforward,
    volume_ids,
)
from palatini.hamiltonian import legendre_fn
from palatini.jets import E, J1, Coords, Point
from palatini.surfaces import sample_jet_point
from palatini.tensor import einsum, jacobian

seeds = st.integers(0, 2**31 - 1)


def frame_vectors(layout=E):
    return [np.eye(layout.size)[layout.position[f"x_{m}"]] for m in range(4)]


def random_form(rng, layout=E, degree=5, terms=20):
    return Form.from_terms(layout, degree, [
        (rng.standard_normal(), tuple(rng.choice(layout.size, degree, replace=False))) for _ in range(terms)])


def poly_fields():
    """Three polynomial vector fields on E touching a few coordinates."""
    X = VectorField.from_components(E, {"g_00": lambda z: z.x[0] * z.Gamma[0, 1, 2], "x_1": 1.0,
                                        "Gamma_0_1_2": lambda z: z.g[0, 0] * z.g[0, 0]})
    Y = VectorField.from_components(E, {"x_0": lambda z: z.g[0, 0], "Gamma_0_1_2": lambda z: z.x[1] * z.x[0]})
    Z = VectorField.from_components(E, {"g_00": lambda z: z.x[1], "x_1": lambda z: z.Gamma[0, 1, 2] * z.x[0]})
    return X, Y, Z


def e_point(seed):
    return sample_jet_point(seed).restrict(E)


def test_volume_form_on_coordinate_frame():
    vol = Form.from_terms(E, 4, [(1.0, volume_ids())])
    assert contract_form(frame_vectors(), vol) == 1.0


def test_low_degree_contraction_is_zero():
    assert contract_form(frame_vectors(), Form.from_terms(E, 3, [(1.0, ("x_0", "x_1", "x_2"))])) == 0.0


def test_contraction_of_dq_wedge_volume():
    # dq ^ d4x contracted with the frame plus a*d/dq on X_0
    vecs = frame_vectors()
    a = 0.7
    vecs[0] = vecs[0] + a * np.eye(E.size)[E.position["g_11"]]
    form = Form.from_terms(E, 5, [(1.0, ("g_11",) + volume_ids())])
    cov = contract_form(vecs, form)
    probe = np.random.default_rng(0).standard_normal(E.size)
    oracle = alternating_oracle(form, [vecs[3], vecs[2], vecs[1], vecs[0], probe])
    assert np.isclose(cov @ probe, oracle)
    assert np.isclose(cov[E.position["g_11"]], 1.0)


def test_d3x_and_d2x_conventions():
    vol = Form.from_terms(E, 4, [(1.0, volume_ids())])
    for mu in range(4):
        sign, rest = d3x_terms(mu)
        d3 = Form.from_terms(E, 3, [(sign, rest)])
        e = np.eye(E.size)[E.position[f"x_{mu}"]]
        assert np.allclose(vol.interior(e).coefs, d3.coefs) and np.array_equal(vol.interior(e).factors,
                                                                               d3.factors)
        for nu in range(4):
            s2, rest2 = d2x_terms(mu, nu)
            inner = vol.interior(e).interior(np.eye(E.size)[E.position[f"x_{nu}"]])
            if s2 == 0:
                assert len(inner) == 0
            else:
                assert np.allclose(inner.coefs, [s2])


def test_form_terms_are_canonical():
    f = Form.from_terms(E, 2, [(1.0, ("g_00", "x_0")), (2.0, ("x_0", "g_00")), (1.0, ("x_1", "x_1"))])
    # -1 from reordering the first term, +2 from the second; the repeated factor drops out
    assert f.dump() == [(1.0, ["x_0", "g_00"])]


@given(seeds)
def test_contraction_is_alternating(seed):
    rng = np.random.default_rng(seed)
    form = random_form(rng)
    vecs = [rng.standard_normal(E.size) for _ in range(4)]
    swapped = [vecs[1], vecs[0], vecs[2], vecs[3]]
    assert np.allclose(contract_form(swapped, form), -contract_form(vecs, form), atol=1e-12)


@given(seeds)
def test_contraction_matches_permutation_oracle(seed):
    rng = np.random.default_rng(seed)
    form = random_form(rng)
    vecs = [rng.standard_normal(E.size) for _ in range(5)]
    lhs = contract_form(vecs[:4], form) @ vecs[4]
    rhs = alternating_oracle(form, [vecs[3], vecs[2], vecs[1], vecs[0], vecs[4]])
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_multivector_transversality_and_scale():
    fields = [VectorField.from_components(E, {f"x_{m}": 1.0}) for m in range(4)]
    mv = MultiVector4(fields, scale=lambda z: 2.0 + 0 * z.x[0])
    p = e_point(1)
    assert mv.transversality_defect(p) == 0.0
    vol = Form.from_terms(E, 4, [(1.0, volume_ids())])
    assert contract_form(mv, vol, p) == 2.0
    with pytest.raises(ValueError):
        MultiVector4(fields[:3])


def test_bracket_with_itself_vanishes():
    X, _, _ = poly_fields()
    assert np.array_equal(bracket(X, X, e_point(2)), np.zeros(E.size))


def test_constant_fields_commute():
    X = VectorField.from_components(E, {"x_0": 1.0, "g_00": 2.0})
    Y = VectorField.from_components(E, {"Gamma_1_1_1": -1.0})
    assert np.array_equal(bracket(X, Y, e_point(3)), np.zeros(E.size))


def _flow(F, p, h, steps=4):
    y = p.flat.copy()
    dt = h / steps
    for _ in range(steps):
        k1 = F.at(Point(E, y))
        k2 = F.at(Point(E, y + dt / 2 * k1))
        k3 = F.at(Point(E, y + dt / 2 * k2))
        k4 = F.at(Point(E, y + dt * k3))
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Point(E, y)


def test_bracket_matches_flow_commutator():
    X, Y, _ = poly_fields()
    p = e_point(4)
    h = 1e-4
    q = _flow(Y, _flow(X, _flow(Y, _flow(X, p, h), h), -h), -h)
    approx = (q.flat - p.flat) / h**2
    br = bracket(X, Y, p)
    assert np.abs(approx - br).max() < 1e-2 * max(1.0, np.abs(br).max())


def test_jacobi_identity():
    X, Y, Z = poly_fields()
    def br_field(A, B):
        def fn(z):
            _, ja = jacobian(lambda w: A.fn(Coords(E, w)), z.flat)
            _, jb = jacobian(lambda w: B.fn(Coords(E, w)), z.flat)
            return einsum("ij,j->i", jb, A.fn(z)) - einsum("ij,j->i", ja, B.fn(z))
        return VectorField(E, fn)

    for s in range(20):
        p = e_point(s)
        total = (bracket(X, br_field(Y, Z), p) + bracket(Y, br_field(Z, X), p)
                 + bracket(Z, br_field(X, Y), p))
        assert np.abs(total).max() < 1e-8


def test_lie_derivative_examples():
    X = VectorField.from_components(E, {"g_00": 1.0})
    p = e_point(5)
    assert lie_derivative_fn(X, lambda z: z.g[0, 0], p) == 1.0
    assert lie_derivative_fn(X, lambda z: 5.0 + 0 * z.x[0], p) == 0.0


def test_from_components_rejects_foreign_coordinates():
    with pytest.raises(ValueError):
        VectorField.from_components(E, {"dg_00_0": 1.0})


def test_pushforward_identity_map():
    X = VectorField.from_components(E, {"g_01": lambda z: z.x[2], "x_3": 1.0})
    p = e_point(6)
    assert np.array_equal(pushforward(lambda z: z.flat, E, X, p), X.at(p))


def test_legendre_pushforward_kills_velocities():
    p = sample_jet_point(7).restrict(J1)
    for cid in ("dg_01_2", "dGamma_1_2_3_0"):
        v = np.eye(J1.size)[J1.position[cid]]
        assert np.abs(pushforward(legendre_fn, J1, v, p)).max() == 0.0
