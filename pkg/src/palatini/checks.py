"""Registry of numeric identity checks, grouped into suites.

Every check is a function of one ``Ctx`` (seed, point index, check id) that
returns a single residual.  Shared inputs (surface samples, solution
parameters) are cached per (seed, index) so checks in one process reuse them;
the cache never changes a value, only avoids recomputing it.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import bridge, hamiltonian as ham, lagrangian as lag, solutions as sol
from .forms import Form, alternating_oracle, contract_form
from .jets import E, J1, Coords, Point, dims, jet_gradient, total_derivative
from .surfaces import random_lorentzian, sample_jet_point, sample_on_surface
from .tensor import PAIRS, contract, metric_aux, primal

PAIR_ROWS, PAIR_COLS = np.array(PAIRS).T

SUITES = ("dims", "oracles", "lagrangian", "hamiltonian", "bridge")

# Stream codes keep shared samples independent of which check asks for them.
_STREAM = {"jet": 1, "S_T": 2, "S_sh": 3, "S_f": 4, "P_f": 5, "S_sh_zero": 6, "S_sh_unit": 7,
           "sh_params": 11, "sf_params": 12, "pf_params": 13, "pf_restricted": 14}

ANCHORS = (
    "bundle dimensions",
    "tensor contraction",
    "jet differentiation",
    "total derivatives",
    "multivector contraction",
    "auxiliary functions",
    "Poincare-Cartan form",
    "local field equations",
    "beth functions",
    "torsion constraints",
    "torsion constraint equivalence",
    "metric equations",
    "connection equations",
    "trace and torsion solutions",
    "semiholonomic solutions",
    "pre-metricity constraints",
    "integrability constraints",
    "gauge vector fields",
    "natural lifts and Noether currents",
    "Legendre maps",
    "projectability",
    "pure-connection coordinates",
    "Hamiltonian solutions",
    "Hamiltonian gauge fields",
    "zeta equivalence",
    "first-order Einstein-Hilbert Lagrangian",
    "connection reconstruction",
    "xi map kernel",
    "form equivalence",
    "integrability of sections",
)


@dataclass(frozen=True)
class Ctx:
    seed: int
    idx: int
    check_id: str

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(self.check_id.encode()), self.idx])

    def jet(self) -> Point:
        return _jet(self.seed, self.idx)

    def surface(self, name: str) -> Point:
        return _surface(self.seed, name, self.idx)


@dataclass(frozen=True)
class Check:
    """``kind``: max (residual <= threshold), witness (value must reach ``threshold``;
    reported residual is threshold / value against 1), fraction (share of points
    returning 1.0), exact (integer deviation, threshold 0)."""

    check_id: str
    anchor: str
    suite: str
    points: int
    fn: Callable[[Ctx], float]
    kind: str = "max"
    threshold: float | None = None
    relative: bool = False  # residual already divided by its scale; default threshold is rtol


# --------------------------------------------------------------- shared data


@lru_cache(maxsize=None)
def _jet(seed, idx) -> Point:
    return sample_jet_point([seed, _STREAM["jet"], idx])


@lru_cache(maxsize=None)
def _surface(seed, name, idx) -> Point:
    if name == "S_sh_zero":
        return sample_on_surface("S_sh", [seed, _STREAM[name], idx], trace=np.zeros(4))
    if name == "S_sh_unit":
        d = np.random.default_rng([seed, _STREAM[name], idx, 1]).standard_normal(4)
        return sample_on_surface("S_sh", [seed, _STREAM[name], idx], trace=d / np.linalg.norm(d))
    return sample_on_surface(name, [seed, _STREAM[name], idx])


@lru_cache(maxsize=None)
def _sh_sampler(seed, idx) -> sol.ParamSampler:
    return sol.ParamSampler(_surface(seed, "S_sh", idx))


@lru_cache(maxsize=None)
def _sf_restricted(seed, idx) -> sol.SolutionParams:
    rng = np.random.default_rng([seed, _STREAM["sf_params"], idx])
    return sol.sample_params(_surface(seed, "S_f", idx), rng, restricted=True)


@lru_cache(maxsize=None)
def _pf_params(seed, idx, restricted=False) -> ham.HamParams:
    rng = np.random.default_rng([seed, _STREAM["pf_restricted" if restricted else "pf_params"], idx])
    return ham.sample_ham_params(_surface(seed, "P_f", idx), rng, restricted=restricted)


@lru_cache(maxsize=None)
def _lift_results(seed, idx) -> tuple:
    p = _surface(seed, "S_f", idx)
    return tuple(sol.natural_lift_checks(Z, p) for Z in sol.standard_fields().values())


@lru_cache(maxsize=None)
def _projectability(seed, idx) -> dict:
    return ham.constraint_projectability(_jet(seed, idx))


@lru_cache(maxsize=None)
def _kernel_rank(seed, idx) -> bridge.KernelRank:
    return bridge.kernel_and_rank_checks(_surface(seed, "P_f", idx))


@lru_cache(maxsize=None)
def _lemma(seed, idx) -> ham.LemmaCheck:
    return ham.lemma_mc_check(_surface(seed, "P_f", idx))


@lru_cache(maxsize=None)
def _pure_solution(seed, idx) -> ham.PureSolutionCheck:
    return ham.pure_solution_check(_surface(seed, "P_f", idx), _pf_params(seed, idx))


@lru_cache(maxsize=None)
def _witness(seed, idx) -> bridge.IntegrabilityWitness:
    rng = np.random.default_rng([seed, 21, idx])
    return bridge.integrability_witness(_surface(seed, "P_f", idx), rng)


@lru_cache(maxsize=None)
def _legendre_rank(seed, idx) -> ham.LegendreRank:
    return ham.legendre_rank(_jet(seed, idx))


@lru_cache(maxsize=None)
def _metric_solution(seed, idx) -> sol.MetricSolution:
    return sol.solve_metric_equation(_surface(seed, "S_T", idx))


@lru_cache(maxsize=None)
def _connection_solution(seed, idx) -> sol.ConnectionSolution:
    return sol.solve_connection_equation(_surface(seed, "S_T", idx))


@lru_cache(maxsize=None)
def _torsion_equivalence(seed, idx) -> sol.TorsionEquivalence:
    rng = np.random.default_rng([seed, 22, idx])
    return sol.torsion_equivalence_check(random_lorentzian(rng), rng.uniform(-1, 1, 4))


_CACHES = (_jet, _surface, _sh_sampler, _sf_restricted, _pf_params, _lift_results, _projectability,
           _kernel_rank, _lemma, _pure_solution, _witness, _legendre_rank, _metric_solution,
           _connection_solution, _torsion_equivalence)


def clear_caches():
    for c in _CACHES:
        c.cache_clear()


def _amax(x) -> float:
    return float(np.abs(np.asarray(primal(x))).max())


def _j1(p: Point) -> Point:
    return p.restrict(J1)


# ---------------------------------------------------------------------- dims


def _dim_check(key, expected):
    return lambda ctx: abs(dims()[key] - expected)


# ------------------------------------------------------------------- oracles


def contraction_loop(ctx):
    rng = ctx.rng
    T, S = rng.standard_normal((4, 4, 4)), rng.standard_normal((4, 4))
    loop = np.zeros(4)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                loop[a] += T[a, b, c] * S[b, c]
    lam = rng.uniform(0.5, 2.0)
    fast = np.asarray(contract("abc,bc->a", T, S))
    scaled = np.asarray(contract("abc,bc->a", lam * T, S))
    return max(_amax(fast - loop), _amax(scaled - lam * fast))


def metric_inverse(ctx):
    g = random_lorentzian(ctx.rng)
    ginv, rho = (np.asarray(primal(a)) for a in metric_aux(g))
    back = np.linalg.solve(ginv, np.eye(4))
    return max(_amax(ginv @ g - np.eye(4)), _amax(back - g) / _amax(g),
               abs(float(rho) - np.sqrt(abs(np.linalg.det(g)))))


def gradient_vs_differences(ctx):
    """dH against central differences on the (g, Gamma) block, mixed tolerance 1e-6."""
    p = _j1(ctx.jet())
    _, grad = jet_gradient(lag.aux_H, p, ("g", "Gamma"))
    grad = np.asarray(primal(grad))
    h = 1e-6
    worst = 0.0
    for i in np.flatnonzero(J1.block_mask(("g", "Gamma"))):
        up, dn = p.flat.copy(), p.flat.copy()
        up[i] += h
        dn[i] -= h
        fd = (float(primal(lag.aux_H(Coords(J1, up)))) - float(primal(lag.aux_H(Coords(J1, dn))))) / (2 * h)
        worst = max(worst, abs(fd - grad[i]) / max(1.0, abs(grad[i])))
    return worst


def total_derivative_chain_rule(ctx):
    """D_tau H against the closed-form partials of H contracted with the jet velocities."""
    p = ctx.jet()
    z = _j1(p).z
    dHg = np.asarray(primal(lag.dH_dg_closed(z)))
    dHG = np.asarray(primal(lag.dH_dGamma_closed(z)))
    worst = 0.0
    for tau in range(4):
        auto = float(total_derivative(lag.aux_H, tau, p))
        hand = float(np.sum(dHg[PAIR_ROWS, PAIR_COLS] * p.dg[PAIR_ROWS, PAIR_COLS, tau])
                     + np.einsum("abc,abc->", dHG, p.dGamma[..., tau]))
        worst = max(worst, abs(auto - hand) / max(1.0, abs(hand)))
    return worst


def contraction_vs_permutations(ctx):
    """contract_form on a random 20-term 5-form against the signed permutation sum."""
    rng = ctx.rng
    lay = E
    terms = [(rng.standard_normal(), tuple(rng.choice(lay.size, 5, replace=False))) for _ in range(20)]
    form = Form.from_terms(lay, 5, terms)
    vecs = [rng.standard_normal(lay.size) for _ in range(5)]
    cov = contract_form(vecs[:4], form)
    oracle = alternating_oracle(form, [vecs[3], vecs[2], vecs[1], vecs[0], vecs[4]])
    swapped = contract_form([vecs[1], vecs[0], vecs[2], vecs[3]], form)
    return max(abs(cov @ vecs[4] - oracle), _amax(cov + swapped))


def aux_L_vs_autodiff(ctx):
    p = _j1(ctx.jet())
    _, grad = jet_gradient(lag.lagrangian_EP, p, ("dGamma",))
    auto = np.asarray(primal(grad))[J1.slices["dGamma"]].reshape(4, 4, 4, 4)
    return _amax(auto - np.asarray(primal(lag.aux_L(p.z))))


def closed_partials(ctx):
    z = _j1(ctx.jet()).z
    pairs = ((lag.dL_dg_closed, lag.dL_dg), (lag.dH_dg_closed, lag.dH_dg), (lag.dH_dGamma_closed, lag.dH_dGamma))
    return max(_amax(np.asarray(primal(a(z))) - np.asarray(primal(b(z)))) for a, b in pairs)


def ricci_vs_loop(ctx):
    z = _j1(ctx.jet()).z
    return _amax(np.asarray(primal(lag.ricci(z))) - lag.ricci_loop(np.asarray(z.Gamma), np.asarray(z.dGamma)))


def hamiltonian_definitions(ctx):
    z = _j1(ctx.jet()).z
    return abs(float(primal(lag.aux_H(z))) - float(primal(lag.aux_H_definition(z))))


def field_equations_by_contraction(ctx):
    """i(X) Omega_L as a covector against the assembled connection, metric and x equations."""
    p = _j1(ctx.jet())
    cf = lag.FieldCoefficients.random(ctx.rng)
    r3, r4, r5 = (np.asarray(primal(r)) for r in lag.field_eq_residuals(cf, p.z))
    cov = contract_form(cf.vectors(), lag.poincare_cartan(p))
    sl = J1.slices
    gaps = (cov[sl["g"]] - r4[PAIR_ROWS, PAIR_COLS], cov[sl["Gamma"]] - r5.ravel(), cov[sl["x"]] + r3,
            cov[sl["dg"]], cov[sl["dGamma"]])
    return max(_amax(g) for g in gaps) / max(1.0, _amax(cov))


def field_equations_by_loop(ctx):
    z = _j1(ctx.jet()).z
    cf = lag.FieldCoefficients.random(ctx.rng)
    _, r4, r5 = (np.asarray(primal(r)) for r in lag.field_eq_residuals(cf, z))
    args = (np.asarray(primal(f(z))) for f in (lag.dH_dg, lag.dH_dGamma, lag.dL_dg))
    l4, l5 = lag.field_eq_residuals_loop(cf, *args)
    return max(_amax(r4 - l4), _amax(r5 - l5))


def x_equation_follows(ctx):
    """On S_sh the semiholonomic coefficients solve the g and Gamma equations, and then the x equation."""
    p = _j1(ctx.surface("S_sh"))
    cf = lag.FieldCoefficients(p.dg, p.dGamma)
    r3, _, _ = lag.field_eq_residuals(cf, p.z)
    return _amax(r3)


# ---------------------------------------------------------------- lagrangian


def beth_identity(ctx):
    return lag.beth_identity_residual(_j1(ctx.jet()).z)


def beth_torsion(ctx):
    return lag.beth_torsion_residual(_j1(ctx.jet()).z)


def torsion_forward(ctx):
    res = _torsion_equivalence(ctx.seed, ctx.idx)
    return max(res.forward, res.backward)


def torsion_null_dimension(ctx):
    res = _torsion_equivalence(ctx.seed, ctx.idx)
    return abs(res.null_dim - 4) + abs(res.t_rank - 20)


def own_surface_constraints(ctx):
    worst = 0.0
    for name, fams in (("S_T", ("t",)), ("S_sh", ("c", "m", "t", "r")), ("S_f", ("c", "m", "t", "r", "i"))):
        z = _j1(ctx.surface(name)).z
        worst = max(worst, _amax(lag.constraint_vector(z, fams)))
    return worst


def metric_solution_residual(ctx):
    return _metric_solution(ctx.seed, ctx.idx).residual


def metric_solution_uniqueness(ctx):
    return _metric_solution(ctx.seed, ctx.idx).lstsq_gap


def metric_incompatibility(ctx):
    """1.0 when a generic point fails to witness inconsistency (least-squares residual <= 1e-3)."""
    return float(sol.metric_lstsq_residual(ctx.jet()) <= 1e-3)


def connection_particular(ctx):
    return _connection_solution(ctx.seed, ctx.idx).residual


def connection_kernel(ctx):
    res = _connection_solution(ctx.seed, ctx.idx)
    return (abs(res.kernel_dim - 246) + abs(res.trace_dim - 16) + abs(res.torsion_dim - 230)
            + abs(res.stacked_rank - 246) + (res.trace_dim + res.torsion_dim - res.stacked_rank))


def homogeneous_basis(ctx):
    return _connection_solution(ctx.seed, ctx.idx).basis_residual


def semiholonomic_field(ctx):
    return sol.field_residual(ctx.surface("S_sh"))


def _draws(ctx, draws=10):
    sampler = _sh_sampler(ctx.seed, ctx.idx)
    rng = ctx.rng
    return [sampler.draw(rng) for _ in range(draws)]


def semiholonomic_tangency(ctx):
    """Lie derivatives of c, m, t, r along X_nu for ten admissible parameter draws."""
    p = _j1(ctx.surface("S_sh"))
    vectors = []
    for params in _draws(ctx):
        vectors += [X.at(p) for X in sol.semiholonomic_solution(p, params)]
    return max(sol.lie_derivatives(p, vectors).values())


def semiholonomic_parameters(ctx):
    """Admissibility of each draw and the displayed second-order K relation."""
    p = ctx.surface("S_sh")
    worst = 0.0
    for params in _draws(ctx, 3):
        worst = max(worst, *sol.param_residuals(p, params).values(), sol.displayed_k_relation(p, params))
    return worst


def premetricity_relation(ctx):
    return sol.premetricity_relation(ctx.surface("S_sh"))


def premetricity_zero_trace(ctx):
    return sol.covariant_metric_max(ctx.surface("S_sh_zero"))


def premetricity_unit_trace(ctx):
    return sol.covariant_metric_max(ctx.surface("S_sh_unit"))


def integrability_witnessed(ctx):
    """Off S_f the brackets of a semiholonomic family have a nonzero metric-velocity block."""
    p = ctx.surface("S_sh")
    fields = sol.semiholonomic_solution(p, _sh_sampler(ctx.seed, ctx.idx).draw(ctx.rng))
    return sol.integrability_residuals(fields, p)["dg"]


def integrability_restricted(ctx):
    p = ctx.surface("S_f")
    params = _sf_restricted(ctx.seed, ctx.idx)
    blocks = sol.integrability_residuals(sol.semiholonomic_solution(p, params), p)
    return max(blocks["dg"], blocks["dGamma"])


def integrability_displayed_restriction(ctx):
    p = ctx.surface("S_f")
    return sol.displayed_c_restriction(p, _sf_restricted(ctx.seed, ctx.idx), sign=-1.0)


def lagrangian_gauge(ctx):
    p = ctx.surface("S_f")
    return max(sol.gauge_checks(p, ctx.rng.standard_normal(4), ctx.rng).values())


def lagrangian_torsion_candidate(ctx):
    val, bound = sol.torsion_candidate_check(ctx.surface("S_f"), sol.torsion_candidate(ctx.rng))
    return abs(val - bound)


def lift_invariance(ctx):
    return max(r["density"] for r in _lift_results(ctx.seed, ctx.idx))


def lift_tangency(ctx):
    keys = [f"{k}_{f}" for k in ("tangency", "display", "identity") for f in "cmtri"]
    return max(r[k] for r in _lift_results(ctx.seed, ctx.idx) for k in keys)


def noether_current(ctx):
    p = ctx.surface("S_f")
    worst = 0.0
    for Z in sol.standard_fields().values():
        lhs, rhs = sol.noether_current(Z, p)
        diff = (lhs - rhs).coefs
        worst = max(worst, _amax(diff) if diff.size else 0.0)
    return worst


# --------------------------------------------------------------- hamiltonian


def legendre_rank(ctx):
    res = _legendre_rank(ctx.seed, ctx.idx)
    return abs(res.rank - 78) + abs(res.kernel_dim - 296)


def legendre_kernel(ctx):
    res = _legendre_rank(ctx.seed, ctx.idx)
    return max(res.kernel_outside_velocities, res.velocities_in_kernel)


def legendre_image(ctx):
    """Legendre image lies on the Hamiltonian constraints; extended map adds -H."""
    p = _j1(ctx.jet())
    m = ham.extended_legendre(p)
    return max(ham.hamiltonian_constraints(ham.legendre(p)), abs(float(m.z.p) + float(primal(lag.aux_H(p.z)))))


def form_projectability(ctx):
    res = ham.projectability_check(ctx.jet(), ctx.rng)
    return max(res.theta_gap, res.omega_gap, res.liouville_gap)


def torsion_projectable(ctx):
    return _projectability(ctx.seed, ctx.idx)["t"]


def others_not_projectable(ctx):
    res = _projectability(ctx.seed, ctx.idx)
    return min(res[f] for f in "cmri")


def hamiltonian_equations(ctx):
    q = ctx.surface("P_f")
    params = _pf_params(ctx.seed, ctx.idx)
    r4, r5 = ham.ham_residuals_nonmomenta(ham.ham_field_coefficients(q, params), q)
    return max(_amax(r4), _amax(r5))


def hamiltonian_tangency(ctx):
    q = ctx.surface("P_f")
    params = _pf_params(ctx.seed, ctx.idx)
    return max(ham.ham_tangency(q, ham.ham_solution(q, params)), ham.displayed_k2(q, params))


def hamiltonian_integrability(ctx):
    q = ctx.surface("P_f")
    params = _pf_params(ctx.seed, ctx.idx, True)
    blocks = ham.ham_bracket_blocks(ham.ham_solution(q, params), q)
    return max(blocks["g"], ham.displayed_g_restriction(q, params), ham.displayed_pure_restriction(q, params))


def pure_volume(ctx):
    res = _lemma(ctx.seed, ctx.idx)
    return max(res.volume_ratio, res.inverse_gap, res.inverse_gap_T, res.momenta_gap)


def pure_round_trip(ctx):
    return _lemma(ctx.seed, ctx.idx).round_trip


def pure_hamiltonian(ctx):
    q = ctx.surface("P_f").restrict(ham.P_NONMOMENTA)
    return abs(ham.H_pure(ham.to_pure(q)) - float(primal(lag.aux_H(q.z))))


def pure_forms(ctx):
    res = ham.pure_chart_check(ctx.surface("P_f"), ctx.rng)
    return max(res.displayed_gap, res.pullback_gap)


def pure_solutions(ctx):
    res = _pure_solution(ctx.seed, ctx.idx)
    return max(res.hfun1, res.hfun2, res.contraction, res.chart_velocity_gap)


def zeta_forms(ctx):
    res = ham.zeta_equivalence_check(ham.to_pure(ctx.surface("P_f").restrict(ham.P_NONMOMENTA)), ctx.rng)
    return max(res.form_gap, res.round_trip, res.constraint, res.identity_blocks)


def hamiltonian_gauge(ctx):
    return max(ham.ham_gauge_checks(ctx.surface("P_f"), ctx.rng.standard_normal(4), ctx.rng).values())


def hamiltonian_torsion_candidate(ctx):
    val, bound = ham.ham_torsion_candidate_check(ctx.surface("P_f"), sol.torsion_candidate(ctx.rng))
    return abs(val - bound)


# -------------------------------------------------------------------- bridge


def lagrangian_bar_routes(ctx):
    rng = ctx.rng
    g = random_lorentzian(rng)
    dg = rng.uniform(-1, 1, (4, 4, 4))
    dg = dg + dg.transpose(1, 0, 2)
    a = float(primal(bridge.lagrangian_bar_of(g, dg)))
    b = bridge.lagrangian_bar_assembled(g, dg)
    e = float(primal(bridge.energy_bar_of(g, dg)))
    return max(abs(a - b), abs(e - a)) / max(1.0, abs(a))


def _random_metric(rng, m):
    eta = np.diag([-1.0] + [1.0] * (m - 1))
    while True:
        lam = rng.uniform(-1, 1, (m, m))
        if abs(np.linalg.det(lam)) > 0.1:
            g = lam.T @ eta @ lam
            return 0.5 * (g + g.T)


def reconstruction(ctx):
    rng = ctx.rng
    worst = 0.0
    for m in (3, 4, 5):
        g = _random_metric(rng, m)
        dg = rng.uniform(-1, 1, (m, m, m))
        dg = dg + dg.transpose(1, 0, 2)
        C = rng.uniform(-1, 1, m)
        G = bridge.reconstruct_connection(g, dg, C, m)
        worst = max(worst, *bridge.reconstruction_residuals(g, dg, C, G).values())
    return worst


def xi_round_trip(ctx):
    """Reconstruction from xi(q) with q's own trace returns q."""
    q = ctx.surface("P_f").restrict(ham.P_NONMOMENTA)
    back = bridge.reconstruct_from_sigma(bridge.xi_map(q), np.einsum("ala->l", q.Gamma))
    return _amax(back.flat - q.flat)


def xi_kernel_rank(ctx):
    res = _kernel_rank(ctx.seed, ctx.idx)
    return abs(res.rank - 54) + abs(res.kernel_dim - 4) + abs(res.t_rank - 20) + abs(res.tangent_dim - 58)


def xi_kernel_angle(ctx):
    return _kernel_rank(ctx.seed, ctx.idx).kernel_angle


def xi_gauge_invariance(ctx):
    q = ctx.surface("P_f")
    rng = ctx.rng
    base = bridge.xi_map(q)
    return max(_amax(bridge.xi_map(bridge.gauge_shift(q, t * rng.standard_normal(4))).flat - base.flat)
               for t in (0.1, 1.0, 10.0))


def form_equivalence(ctx):
    res = bridge.form_equivalence_check(ctx.surface("P_f"), ctx.rng, tuples=20)
    return max(res.deviation, res.kernel_value)


def comparison_table(ctx):
    q = ctx.surface("P_f")
    return max(bridge.comparison_table_check(q, _pf_params(ctx.seed, ctx.idx, True)).values())


def witness_constraints(ctx):
    return _witness(ctx.seed, ctx.idx).constraints


def witness_center(ctx):
    return _witness(ctx.seed, ctx.idx).center


# ------------------------------------------------------------------ registry


def _registry():
    L, H, B, O = "lagrangian", "hamiltonian", "bridge", "oracles"
    c = Check
    return (
        c("dims.E", "bundle dimensions", "dims", 1, _dim_check("E", 78), "exact", 0.0),
        c("dims.J1", "bundle dimensions", "dims", 1, _dim_check("J1", 374), "exact", 0.0),
        c("dims.Sigma_J1", "bundle dimensions", "dims", 1, _dim_check("Sigma_J1", 54), "exact", 0.0),
        c("oracle.contract_loop", "tensor contraction", O, 100, contraction_loop, threshold=1e-12),
        c("oracle.metric_inverse", "tensor contraction", O, 100, metric_inverse, threshold=1e-12),
        c("oracle.gradient_fd", "jet differentiation", O, 10, gradient_vs_differences, threshold=1e-6),
        c("oracle.total_derivative", "total derivatives", O, 100, total_derivative_chain_rule, threshold=1e-10),
        c("oracle.contract_permutations", "multivector contraction", O, 50, contraction_vs_permutations,
          threshold=1e-12),
        c("oracle.aux_L", "auxiliary functions", O, 100, aux_L_vs_autodiff, threshold=1e-11),
        c("oracle.closed_partials", "auxiliary functions", O, 100, closed_partials, threshold=1e-11),
        c("oracle.ricci_loop", "auxiliary functions", O, 100, ricci_vs_loop, threshold=1e-12),
        c("oracle.hamiltonian_definitions", "auxiliary functions", O, 100, hamiltonian_definitions,
          threshold=1e-11),
        c("oracle.field_eq_contraction", "Poincare-Cartan form", O, 20, field_equations_by_contraction,
          threshold=1e-10),
        c("oracle.field_eq_loop", "local field equations", O, 20, field_equations_by_loop, threshold=1e-10),
        c("lag.x_equation", "local field equations", L, 100, x_equation_follows),
        c("lag.beth_identity", "beth functions", L, 100, beth_identity, threshold=1e-10),
        c("lag.beth_torsion", "beth functions", L, 100, beth_torsion, threshold=1e-10),
        c("lag.surface_constraints", "torsion constraints", L, 20, own_surface_constraints),
        c("lag.torsion_equivalence", "torsion constraint equivalence", L, 100, torsion_forward, threshold=1e-12),
        c("lag.torsion_null_dim", "torsion constraint equivalence", L, 50, torsion_null_dimension, "exact", 0.0),
        c("lag.metric_solution", "metric equations", L, 100, metric_solution_residual),
        c("lag.metric_uniqueness", "metric equations", L, 100, metric_solution_uniqueness, threshold=1e-8),
        c("lag.metric_incompatibility", "metric equations", L, 100, metric_incompatibility, "fraction", 0.05),
        c("lag.connection_particular", "connection equations", L, 20, connection_particular),
        c("lag.connection_kernel", "trace and torsion solutions", L, 20, connection_kernel, "exact", 0.0),
        c("lag.homogeneous_basis", "trace and torsion solutions", L, 20, homogeneous_basis, threshold=1e-11),
        c("lag.semiholonomic_field", "semiholonomic solutions", L, 100, semiholonomic_field),
        c("lag.semiholonomic_tangency", "semiholonomic solutions", L, 100, semiholonomic_tangency,
          threshold=1e-8),
        c("lag.semiholonomic_params", "semiholonomic solutions", L, 20, semiholonomic_parameters, threshold=1e-8),
        c("lag.premetricity", "pre-metricity constraints", L, 100, premetricity_relation),
        c("lag.premetricity_zero_trace", "pre-metricity constraints", L, 20, premetricity_zero_trace),
        c("lag.premetricity_unit_trace", "pre-metricity constraints", L, 20, premetricity_unit_trace,
          "witness", 1e-3),
        c("lag.integrability_witness", "integrability constraints", L, 20, integrability_witnessed,
          "witness", 1e-3),
        c("lag.integrability_restricted", "integrability constraints", L, 2, integrability_restricted,
          threshold=1e-8),
        c("lag.integrability_display", "integrability constraints", L, 2, integrability_displayed_restriction,
          threshold=1e-8),
        c("lag.gauge", "gauge vector fields", L, 20, lagrangian_gauge, threshold=1e-8),
        c("lag.torsion_candidate", "gauge vector fields", L, 20, lagrangian_torsion_candidate, threshold=1e-10),
        c("lag.lift_invariance", "natural lifts and Noether currents", L, 20, lift_invariance, threshold=1e-8),
        c("lag.lift_tangency", "natural lifts and Noether currents", L, 20, lift_tangency, threshold=1e-8),
        c("lag.noether_current", "natural lifts and Noether currents", L, 20, noether_current, threshold=1e-10),
        c("ham.legendre_rank", "Legendre maps", H, 50, legendre_rank, "exact", 0.0),
        c("ham.legendre_kernel", "Legendre maps", H, 50, legendre_kernel, threshold=1e-12),
        c("ham.legendre_image", "Legendre maps", H, 100, legendre_image, threshold=1e-12),
        c("ham.form_projectability", "projectability", H, 20, form_projectability),
        c("ham.torsion_projectable", "projectability", H, 20, torsion_projectable, threshold=1e-12),
        c("ham.others_not_projectable", "projectability", H, 20, others_not_projectable, "witness", 1e-3),
        c("ham.equations", "Hamiltonian solutions", H, 100, hamiltonian_equations),
        c("ham.tangency", "Hamiltonian solutions", H, 100, hamiltonian_tangency, threshold=1e-8),
        c("ham.integrability", "Hamiltonian solutions", H, 20, hamiltonian_integrability, threshold=1e-8),
        c("ham.pure_volume", "pure-connection coordinates", H, 100, pure_volume, threshold=1e-10),
        c("ham.pure_round_trip", "pure-connection coordinates", H, 100, pure_round_trip, threshold=1e-10),
        c("ham.pure_hamiltonian", "pure-connection coordinates", H, 100, pure_hamiltonian, threshold=1e-11),
        c("ham.pure_forms", "pure-connection coordinates", H, 20, pure_forms),
        c("ham.pure_solutions", "pure-connection coordinates", H, 100, pure_solutions),
        c("ham.zeta", "zeta equivalence", H, 20, zeta_forms),
        c("ham.gauge", "Hamiltonian gauge fields", H, 50, hamiltonian_gauge, threshold=1e-8),
        c("ham.torsion_candidate", "Hamiltonian gauge fields", H, 50, hamiltonian_torsion_candidate,
          threshold=1e-10),
        c("bridge.lagrangian_bar", "first-order Einstein-Hilbert Lagrangian", B, 100, lagrangian_bar_routes,
          relative=True),
        c("bridge.reconstruction", "connection reconstruction", B, 100, reconstruction),
        c("bridge.xi_round_trip", "connection reconstruction", B, 100, xi_round_trip),
        c("bridge.xi_kernel_rank", "xi map kernel", B, 50, xi_kernel_rank, "exact", 0.0),
        c("bridge.xi_kernel_angle", "xi map kernel", B, 50, xi_kernel_angle),
        c("bridge.xi_gauge_invariance", "xi map kernel", B, 100, xi_gauge_invariance, threshold=1e-12),
        c("bridge.form_equivalence", "form equivalence", B, 10, form_equivalence, threshold=1e-8),
        c("bridge.comparison_table", "form equivalence", B, 20, comparison_table, threshold=1e-8),
        c("bridge.integrability_witness", "integrability of sections", B, 20, witness_constraints,
          threshold=1e-7),
        c("bridge.witness_center", "integrability of sections", B, 20, witness_center, threshold=1e-12),
    )


CHECKS = _registry()
BY_ID = {c.check_id: c for c in CHECKS}

assert len(BY_ID) == len(CHECKS), "duplicate check ids"
assert {c.anchor for c in CHECKS} == set(ANCHORS), "every anchor needs a check and every check an anchor"
assert {c.suite for c in CHECKS} == set(SUITES)


def checks_for(suites) -> list[Check]:
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise KeyError(f"unknown suite(s) {sorted(unknown)}; expected some of {list(SUITES)}")
    return [c for c in CHECKS if c.suite in suites]
