import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from palatini.jets import (
    BLOCKS,
    E,
    J1,
    J1_STAR,
    J2,
    M_EXT,
    P_NONMOMENTA,
    SIGMA_J1,
    Coords,
    dims,
    dump_points,
    load_point,
    point_from_json,
    total_derivative,
)
from palatini.lagrangian import aux_H, dH_dGamma_closed, dH_dg_closed, torsion_constraint_t
from palatini.surfaces import (
    SurfaceSamplingError,
    sample_jet_point,
    sample_on_surface,
    surface_residuals,
)
from palatini.tensor import PAIRS, primal

PR, PC = np.array(PAIRS).T
seeds = st.integers(0, 2**31 - 1)


def test_dims():
    assert dims() == {"E": 78, "J1": 374, "M": 375, "J1star": 374, "P": 78, "Sigma_J1": 54}


def test_dims_match_stored_fields():
    assert E.size == sum(len(BLOCKS[b][1]) for b in E.blocks) == 78
    assert J1.size == 4 + 10 + 64 + 40 + 256
    assert SIGMA_J1.size == 4 + 10 + 40
    assert M_EXT.size == J1_STAR.size + 1 == P_NONMOMENTA.size + 297
    assert J2.size == 374 + 100 + 640


def test_sampler_is_deterministic():
    assert sample_jet_point(11) == sample_jet_point(11)
    assert sample_jet_point(11) != sample_jet_point(12)


def test_sampled_metrics_are_lorentzian():
    for s in range(50):
        w = np.linalg.eigvalsh(sample_jet_point(s).g)
        assert (w < 0).sum() == 1 and (w > 0).sum() == 3


def test_sampled_metrics_are_nondegenerate():
    assert min(abs(np.linalg.det(sample_jet_point(s).g)) for s in range(1000)) > 1e-6


def test_second_order_symmetries():
    p = sample_jet_point(3)
    assert np.array_equal(p.ddg, p.ddg.transpose(1, 0, 2, 3))
    assert np.array_equal(p.ddg, p.ddg.transpose(0, 1, 3, 2))
    assert np.array_equal(p.ddGamma, p.ddGamma.transpose(0, 1, 2, 4, 3))
    assert np.array_equal(p.dg, p.dg.transpose(1, 0, 2))


@pytest.mark.parametrize("surface,families", [
    ("S_T", ("t",)),
    ("S_sh", ("c", "m", "t", "r")),
    ("S_f", ("c", "m", "t", "r", "i")),
])
def test_surface_samples_satisfy_their_constraints(surface, families):
    for s in range(3):
        res = surface_residuals(sample_on_surface(surface, s), families)
        assert max(res.values()) < 1e-9, res


def test_torsion_surface_is_exact():
    p = sample_on_surface("S_T", 4)
    assert np.abs(primal(torsion_constraint_t(p.z))).max() < 1e-12


def test_surface_aliases_and_errors():
    assert sample_on_surface("st", 1) == sample_on_surface("S_T", 1)
    assert sample_on_surface("pf", 1).layout is J1_STAR
    with pytest.raises(KeyError):
        sample_on_surface("S_x", 0)


def test_sampling_error_carries_diagnostics():
    err = SurfaceSamplingError("S_f", 1e-3, 7)
    assert err.surface == "S_f" and err.seed == 7 and "inconsistent" in str(err)


def test_total_derivative_of_coordinate(minkowski2):
    p = sample_jet_point(8)
    for tau in range(4):
        assert total_derivative(lambda z: z.g[0, 1], tau, p) == p.dg[0, 1, tau]


def test_total_derivative_of_constant():
    assert total_derivative(lambda z: 3.0 + 0 * z.x[0], 2, sample_jet_point(9)) == 0.0


def test_total_derivative_of_H_against_closed_partials():
    p = sample_jet_point(10)
    z = p.restrict(J1).z
    dHg, dHG = np.asarray(primal(dH_dg_closed(z))), np.asarray(primal(dH_dGamma_closed(z)))
    for tau in range(4):
        hand = np.sum(dHg[PR, PC] * p.dg[PR, PC, tau]) + np.einsum("abc,abc->", dHG, p.dGamma[..., tau])
        assert abs(total_derivative(aux_H, tau, p) - hand) < 1e-10 * max(1.0, abs(hand))


def test_total_derivative_rejects_second_order_functions():
    with pytest.raises(ValueError):
        total_derivative(lambda z: z.ddg[0, 0, 0, 0], 0, sample_jet_point(1))
    with pytest.raises(ValueError):
        total_derivative(aux_H, 0, sample_jet_point(1).restrict(J1))


@given(seeds, st.integers(0, 3))
def test_total_derivative_is_a_derivation(seed, tau):
    p = sample_jet_point(seed)

    def f(z):
        return aux_H(z)

    def g(z):
        return z.Gamma[0, 1, 2] * z.g[1, 1] + z.dGamma[1, 0, 0, 3]

    lhs = total_derivative(lambda z: f(z) * g(z), tau, p)
    fv, gv = float(primal(f(p.restrict(J1).z))), float(primal(g(p.restrict(J1).z)))
    rhs = total_derivative(f, tau, p) * gv + fv * total_derivative(g, tau, p)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


def test_json_round_trip_is_bit_exact(tmp_path):
    pts = [sample_jet_point(1), sample_on_surface("P_f", 2), sample_on_surface("S_sh", 3).restrict(SIGMA_J1)]
    path = tmp_path / "pts.json"
    dump_points(pts, path)
    loaded = [point_from_json(o) for o in json.loads(path.read_text())]
    assert all(a == b for a, b in zip(pts, loaded))
    assert load_point(path) == pts[0]


def test_json_field_names_and_sizes():
    obj = sample_jet_point(1).to_json()
    assert {k: len(v) for k, v in obj.items()} == {
        "x": 4, "g": 10, "Gamma": 64, "dg": 40, "dGamma": 256, "ddg": 100, "ddGamma": 640}
    obj["g"] = obj["g"][:9]
    with pytest.raises(ValueError, match="needs 10"):
        point_from_json(obj)


def test_layout_pack_rejects_broken_symmetry():
    g = np.arange(16.0).reshape(4, 4)
    with pytest.raises(ValueError, match="symmetry"):
        SIGMA_J1.pack(x=np.zeros(4), g=g, dg=np.zeros((4, 4, 4)))


def test_coords_reject_wrong_size():
    with pytest.raises(ValueError):
        Coords(J1, np.zeros(10))
