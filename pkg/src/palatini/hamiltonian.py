"""Hamiltonian side: Legendre maps, the two charts of the image, field equations, solutions, gauge, zeta."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import Differential, FormSpec, VectorField, contract_form, d3x_terms, volume_ids
from .jets import J1, J1_STAR, J1_STAR_CONN, M_EXT, P_NONMOMENTA, P_PURE, VELOCITY_BLOCKS, Coords, Point
from .lagrangian import (
    THIRD,
    D,
    FieldCoefficients,
    aux_H,
    aux_L,
    constraint_vector,
    field_eq_residuals,
    hamiltonian_of,
    momenta_of,
    poincare_cartan_spec,
    premetric_combination,
    theta_spec,
    torsion_constraint_t,
    trace_free_part,
    trace_torsion_of,
)
from .solutions import (
    CONSISTENT,
    InconsistentSystemError,
    InvalidParamsError,
    _max,
    lstsq_affine,
    null_space,
    random_tangent_tuples,
    solve_affine,
    torsion_conditions,
)
from .tensor import (
    MULT,
    PAIR_INDEX,
    PAIRS,
    SINGULAR_DET,
    SingularMetricError,
    concat,
    det,
    directional,
    einsum,
    flatten,
    inv,
    jacobian,
    metric_aux,
    mul,
    neg,
    primal,
    reciprocal,
    reshape,
    sqrt,
)

PAIR_ROWS, PAIR_COLS = np.array(PAIRS).T


# --------------------------------------------------------------- Legendre


def legendre_fn(z):
    """J1 coordinates -> J1* coordinates (flat), differentiable."""
    L = momenta_of(z.g)
    return concat([z.x, z.g[PAIR_ROWS, PAIR_COLS], flatten(z.Gamma), np.zeros(40), flatten(L)])


def extended_legendre_fn(z):
    """J1 -> M: the Legendre image plus the scalar p = -H."""
    return concat([legendre_fn(z), reshape(neg(hamiltonian_of(z.g, z.Gamma)), (1,))])


def _as_j1(p: Point) -> Point:
    return p if p.layout is J1 else p.restrict(J1)


def legendre(p: Point) -> Point:
    p1 = _as_j1(p)
    return Point(J1_STAR, np.asarray(primal(legendre_fn(p1.z))))


def extended_legendre(p: Point) -> Point:
    p1 = _as_j1(p)
    return Point(M_EXT, np.asarray(primal(extended_legendre_fn(p1.z))))


def hamiltonian_constraints(q: Point) -> float:
    """Max deviation from p^{ab,m} = 0 and p_a^{bc,m} = rho (delta^m_a g^{bc} - delta^b_a g^{mc})."""
    z = q.z
    return max(_max(z.p_metric), _max(np.asarray(z.p_conn) - np.asarray(primal(momenta_of(z.g)))))


@dataclass(frozen=True)
class LegendreRank:
    rank: int
    kernel_dim: int
    kernel_outside_velocities: float
    velocities_in_kernel: float


def legendre_rank(p: Point, rtol=1e-8) -> LegendreRank:
    p1 = _as_j1(p)
    _, jac = jacobian(lambda w: legendre_fn(Coords(J1, w)), p1.flat)
    jac = np.asarray(primal(jac))
    kern, rank = null_space(jac, rtol)
    vel = J1.block_mask(VELOCITY_BLOCKS)
    outside = float(np.abs(kern[~vel]).max()) if kern.size else 0.0
    inside = float(np.abs(jac[:, vel]).max())
    return LegendreRank(rank, kern.shape[1], outside, inside)


# ------------------------------------------------------ projectability


def _velocity_directions():
    return J1.block_mask(VELOCITY_BLOCKS)


def _pushed(vectors, jac):
    return [jac @ v for v in vectors]


_H_OMEGA = {}


def omega_H_nonmomenta(q: Point):
    """Omega_H in the non-momenta chart: same coefficients as the Lagrangian form."""
    if "omega" not in _H_OMEGA:
        _H_OMEGA["omega"] = poincare_cartan_spec(P_NONMOMENTA)
        _H_OMEGA["theta"] = theta_spec(P_NONMOMENTA)
    return _H_OMEGA["omega"].at(q)


def theta_H_nonmomenta(q: Point):
    omega_H_nonmomenta(q)
    return _H_OMEGA["theta"].at(q)


def liouville_theta(m: Point):
    """Tautological form on M: p d4x + p^{ab,m} dg_ab ^ d3x_m + p_a^{bc,m} dGamma^a_{bc} ^ d3x_m."""
    from .forms import Form

    z = m.z
    terms = [(float(z.p), volume_ids())]
    pm, pc = np.asarray(z.p_metric), np.asarray(z.p_conn)
    for mu in range(4):
        sign, rest = d3x_terms(mu)
        for k, (a, b) in enumerate(PAIRS):
            terms.append((sign * pm[a, b, mu], (f"g_{a}{b}",) + rest))
        for a, b, c in np.ndindex(4, 4, 4):
            terms.append((sign * pc[a, b, c, mu], (f"Gamma_{a}_{b}_{c}",) + rest))
    return Form.from_terms(M_EXT, 4, terms)


def projection_jacobian(source, target):
    """Jacobian of the coordinate projection dropping blocks absent from ``target``."""
    jac = np.zeros((target.size, source.size))
    for b in target.blocks:
        s, t = source.slices[b], target.slices[b]
        jac[t, s] = np.eye(t.stop - t.start)
    return jac


@dataclass(frozen=True)
class Projectability:
    theta_gap: float
    omega_gap: float
    liouville_gap: float


def projectability_check(p: Point, rng, tuples=3) -> Projectability:
    """Theta_L and Omega_L against the Hamiltonian forms at the Legendre image."""
    from .lagrangian import poincare_cartan, theta

    p1 = _as_j1(p)
    q = p1.restrict(P_NONMOMENTA)
    proj = projection_jacobian(J1, P_NONMOMENTA)
    om_L, th_L = poincare_cartan(p1), theta(p1)
    om_H, th_H = omega_H_nonmomenta(q), theta_H_nonmomenta(q)
    m = extended_legendre(p1)
    _, ext_jac = jacobian(lambda w: extended_legendre_fn(Coords(J1, w)), p1.flat)
    ext_jac = np.asarray(primal(ext_jac))
    liou = liouville_theta(m)
    gaps = [0.0, 0.0, 0.0]
    for _ in range(tuples):
        vecs = [rng.standard_normal(J1.size) for _ in range(4)]
        gaps[0] = max(gaps[0], abs(contract_form(vecs, th_L) - contract_form(_pushed(vecs, proj), th_H)))
        cov_L = contract_form(vecs, om_L)
        cov_H = contract_form(_pushed(vecs, proj), om_H) @ proj
        gaps[1] = max(gaps[1], float(np.abs(cov_L - cov_H).max()))
        gaps[2] = max(gaps[2], abs(contract_form(vecs, th_L) - contract_form(_pushed(vecs, ext_jac), liou)))
    return Projectability(*gaps)


def constraint_projectability(p: Point, families=("t", "c", "m", "r", "i")) -> dict:
    """Largest Lie derivative of each family along the Legendre kernel (velocity directions)."""
    p1 = _as_j1(p)
    vel = np.flatnonzero(_velocity_directions())
    seeds = np.eye(J1.size)[:, vel]
    out = {}
    for f in families:
        _, der = jacobian(lambda w: constraint_vector(Coords(J1, w), (f,)), p1.flat, seeds)
        out[f] = float(np.abs(np.asarray(primal(der))).max())
    return out


# ------------------------------------------------ non-momenta field equations


def _as_P(q: Point) -> Point:
    return q if q.layout is P_NONMOMENTA else q.restrict(P_NONMOMENTA)


def ham_residuals_nonmomenta(coeffs: FieldCoefficients, q: Point):
    """(residual of the g-variation, residual of the Gamma-variation)."""
    _, res4, res5 = field_eq_residuals(coeffs, _as_P(q).z)
    return res4, res5


@dataclass(frozen=True)
class HamParams:
    """C[b, n] = C_{b,n} and K[a, b, c, n] = K^a_{bc,n}."""

    C: np.ndarray
    K: np.ndarray


def first_order_particular(G):
    """G^l_{nc} G^a_{bl}; axes (a, b, c, n)."""
    return einsum("lnc,abl->abcn", G, G)


def _t_tangency_nu(K_n, P_n):
    return trace_free_part(K_n - einsum("abc->acb", K_n) + P_n - einsum("abc->acb", P_n))


def ham_connection_velocity(G, params: HamParams):
    return first_order_particular(G) + einsum("bn,ac->abcn", params.C, D) + params.K


def _ham_g_block(G, g, K, C):
    """F_{ab} coefficient of [X_mu, X_nu] for constant parameters; axes (a, b, m, n)."""
    fG = ham_connection_velocity(G, HamParams(C, K))
    fg = premetric_combination(g, G)
    _, dP = jacobian(
        lambda v: premetric_combination(reshape(v[:16], (4, 4)), reshape(v[16:], (4, 4, 4))),
        np.concatenate([np.asarray(g).ravel(), np.asarray(G).ravel()]),
        concat([reshape(fg, (16, 4)), reshape(fG, (64, 4))]),
    )
    # dP[r, s, n, m] = X_m(f_{rs,n})
    return dP - einsum("rsnm->rsmn", dP)


def ham_param_conditions(q: Point, K, C, restricted):
    z = _as_P(q).z
    P = np.asarray(primal(first_order_particular(z.Gamma)))
    parts = [torsion_conditions(K)]
    parts += [flatten(_t_tangency_nu(K[..., n], P[..., n])) for n in range(4)]
    if restricted:
        parts.append(flatten(_ham_g_block(z.Gamma, z.g, K, C)))
    return concat(parts)


def sample_ham_params(q: Point, rng=None, restricted=False) -> HamParams:
    """Parameters satisfying the first-order conditions (and the bracket g-block restriction)."""
    C = np.zeros((4, 4)) if rng is None else rng.standard_normal((4, 4))
    M, b = lstsq_affine(lambda v: ham_param_conditions(q, reshape(v, (4, 4, 4, 4)), C, restricted), 256)
    v, res = solve_affine(M, b, rng)
    if res > CONSISTENT:
        raise InconsistentSystemError("Hamiltonian parameter conditions", res)
    return HamParams(C, v.reshape(4, 4, 4, 4))


def ham_param_residuals(q: Point, params: HamParams) -> dict:
    z = _as_P(q).z
    P = np.asarray(primal(first_order_particular(z.Gamma)))
    K = params.K
    return {
        "K1": _max(torsion_conditions(K)),
        "K2": max(_max(_t_tangency_nu(K[..., n], P[..., n])) for n in range(4)),
    }


def displayed_k2(q: Point, params: HamParams) -> float:
    """The displayed first-order K relation (brackets without 1/2)."""
    z = _as_P(q).z
    G, K = z.Gamma, params.K

    def anti(X):
        return X - einsum("abcm->acbm", X)

    trK = einsum("lclm->cm", K)
    rhs = (
        -THIRD * anti(einsum("ab,cm->abcm", D, trK))
        - anti(einsum("lmc,abl->abcm", G, G))
        + THIRD * anti(einsum("ab,lmc,nnl->abcm", D, G, G))
        - THIRD * anti(einsum("ab,lmn,ncl->abcm", D, G, G))
    )
    return _max(anti(K) - rhs)


def displayed_g_restriction(q: Point, params: HamParams) -> float:
    """g_{al}K^l_{[n b m]} + g_{bl}K^l_{[n a m]} + 2 g_{ab} T^l_{nm} G^s_{sl}, axes (a, b, m, n)."""
    z = _as_P(q).z
    g, G, K = np.asarray(z.g), np.asarray(z.Gamma), params.K
    Kb = np.einsum("lnbm->lbmn", K) - np.einsum("lmbn->lbmn", K)
    T = G - G.transpose(0, 2, 1)
    val = (
        np.einsum("al,lbmn->abmn", g, Kb)
        + np.einsum("bl,lamn->abmn", g, Kb)
        + 2.0 * np.einsum("ab,lnm,ssl->abmn", g, T, G)
    )
    return _max(val)


def displayed_pure_restriction(q: Point, params: HamParams) -> float:
    """p^{as}K^b_{[m s n]} + p^{bs}K^a_{[m s n]} - 1/3 p^{ab}K^s_{[m s n]} - 2/3 p^{ab} T^l_{nm} G^s_{sl}."""
    r = to_pure(_as_P(q))
    p, G, K = np.asarray(r.z.p_sym), np.asarray(r.z.Gamma), params.K
    Kb = np.einsum("bmsn->bsmn", K) - np.einsum("bnsm->bsmn", K)
    T = G - G.transpose(0, 2, 1)
    lhs = (
        np.einsum("as,bsmn->abmn", p, Kb)
        + np.einsum("bs,asmn->abmn", p, Kb)
        - THIRD * np.einsum("ab,ssmn->abmn", p, Kb)
    )
    return _max(lhs - 2.0 * THIRD * np.einsum("ab,lnm,ssl->abmn", p, T, G))


def check_ham_params(q: Point, params: HamParams, tol=1e-8):
    bad = {k: v for k, v in ham_param_residuals(q, params).items() if v > tol}
    if bad:
        raise InvalidParamsError(f"parameters violate the Hamiltonian solution conditions: {bad}")


def ham_solution(q: Point, params: HamParams, check=True):
    """Factors X_0..X_3 of the Hamiltonian solution family on the non-momenta chart."""
    if check:
        check_ham_params(q, params)
    fields = []
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = 1.0

        def fn(z, nu=nu, e=e):
            fg = premetric_combination(z.g, z.Gamma)
            fG = ham_connection_velocity(z.Gamma, params)
            return concat([e, fg[PAIR_ROWS, PAIR_COLS, nu], flatten(fG[..., nu])])

        fields.append(VectorField(P_NONMOMENTA, fn, f"XH_{nu}"))
    return fields


def ham_field_coefficients(q: Point, params: HamParams) -> FieldCoefficients:
    z = _as_P(q).z
    return FieldCoefficients(
        np.asarray(primal(premetric_combination(z.g, z.Gamma))),
        np.asarray(primal(ham_connection_velocity(z.Gamma, params))),
    )


def ham_tangency(q: Point, fields) -> float:
    """Max |X_nu(t)| over the four factors."""
    qp = _as_P(q)
    V = np.stack([X.at(qp) for X in fields], axis=1)
    _, der = jacobian(lambda w: flatten(torsion_constraint_t(Coords(P_NONMOMENTA, w))), qp.flat, V)
    return _max(der)


def ham_bracket_blocks(fields, q: Point) -> dict:
    qp = _as_P(q)
    vals = [X.jacobian(qp) for X in fields]
    out = {b: 0.0 for b in P_NONMOMENTA.blocks}
    for m in range(4):
        for n in range(m + 1, 4):
            xv, jx = vals[m]
            yv, jy = vals[n]
            br = jy @ xv - jx @ yv
            for b in out:
                out[b] = max(out[b], float(np.abs(br[P_NONMOMENTA.slices[b]]).max()))
    return out


# -------------------------------------------------------- pure connection


def pure_from_metric(g):
    """p^{ab} = -3 rho g^{ab}."""
    ginv, rho = metric_aux(g)
    return mul(-3.0 * rho, ginv)


def metric_from_pure(p_sym):
    """g_{ab} from g^{ab} = -(3 / T) p^{ab}, T = sqrt|det p|."""
    d = det(p_sym)
    if abs(float(primal(d))) < SINGULAR_DET:
        raise SingularMetricError("degenerate pure-connection momenta")
    T = sqrt(d if float(primal(d)) > 0 else neg(d))
    ginv = mul(mul(-3.0, reciprocal(T)), p_sym)
    return inv(ginv)


def to_pure_fn(z):
    return concat([z.x, flatten(z.Gamma), pure_from_metric(z.g)[PAIR_ROWS, PAIR_COLS]])


def from_pure_fn(z):
    g = metric_from_pure(z.p_sym)
    return concat([z.x, g[PAIR_ROWS, PAIR_COLS], flatten(z.Gamma)])


def to_pure(q: Point) -> Point:
    qp = _as_P(q)
    return Point(P_PURE, np.asarray(primal(to_pure_fn(qp.z))))


def from_pure(r: Point) -> Point:
    return Point(P_NONMOMENTA, np.asarray(primal(from_pure_fn(r.z))))


@dataclass(frozen=True)
class LemmaCheck:
    volume_ratio: float
    inverse_gap: float
    inverse_gap_T: float
    round_trip: float
    momenta_gap: float


def pure_momenta(p_sym):
    """p_a^{bc,m} = 1/3 delta^b_a p^{mc} - 1/3 delta^m_a p^{bc}."""
    return THIRD * (einsum("ba,mc->abcm", D, p_sym) - einsum("ma,bc->abcm", D, p_sym))


def lemma_mc_check(q: Point) -> LemmaCheck:
    qp = _as_P(q)
    g = np.asarray(qp.z.g)
    ginv, rho = (np.asarray(primal(a)) for a in metric_aux(g))
    r = to_pure(qp)
    p = np.asarray(r.z.p_sym)
    T = np.sqrt(abs(np.linalg.det(p)))
    back = from_pure(r)
    L = np.asarray(primal(momenta_of(g)))
    return LemmaCheck(
        volume_ratio=abs(T - 9.0 * float(rho)),
        inverse_gap=float(np.abs(ginv + p / (3.0 * float(rho))).max()),
        inverse_gap_T=float(np.abs(ginv + 3.0 * p / T).max()),
        round_trip=float(np.abs(back.flat - qp.flat).max()),
        momenta_gap=float(np.abs(pure_momenta(p) - L).max()),
    )


def H_pure_of(p_sym, G):
    quad = einsum("ab,cbs,sca->", p_sym, G, G) - einsum("ab,cba,ssc->", p_sym, G, G)
    return mul(-THIRD, quad)


def H_pure(r: Point):
    return float(primal(H_pure_of(r.z.p_sym, r.z.Gamma)))


def _H_pure_fn(z):
    return H_pure_of(z.p_sym, z.Gamma)


def _pure_L_fn(z):
    return pure_momenta(z.p_sym)


def omega_pure_spec() -> FormSpec:
    """dH ^ d4x - dL(p) ^ dGamma ^ d3x with the momenta written through p^{ab}."""
    return poincare_cartan_spec(P_PURE, _H_pure_fn, _pure_L_fn)


def _dp(b, c):
    a, d = min(b, c), max(b, c)
    return f"ps_{a}{d}"


def omega_pure_displayed_spec() -> FormSpec:
    """The displayed pure-chart form with coefficients 1/6 and the (bc) symmetrizer without 1/2."""
    terms = [(1.0, (Differential("H", _H_pure_fn),) + volume_ids())]
    sixth = 1.0 / 6.0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for m in range(4):
                    s, rest = d3x_terms(m)
                    if a == m:
                        for x, y in ((b, c), (c, b)):
                            terms.append((sixth * s, (_dp(b, c), f"Gamma_{a}_{x}_{y}") + rest))
                    if a == b:
                        # -1/6 dp^{m c} ^ dGamma^a_{b m} ^ d3x_c  (with m, c as the free pair)
                        s2, rest2 = d3x_terms(c)
                        terms.append((-sixth * s2, (_dp(m, c), f"Gamma_{a}_{b}_{m}") + rest2))
                        terms.append((-sixth * s, (_dp(m, c), f"Gamma_{a}_{b}_{c}") + rest))
    return FormSpec(P_PURE, 5, terms)


_PURE = {}


def omega_pure(r: Point, displayed=False):
    key = "displayed" if displayed else "momenta"
    if key not in _PURE:
        _PURE[key] = omega_pure_displayed_spec() if displayed else omega_pure_spec()
    return _PURE[key].at(r)


def random_pure_point(rng, q: Point | None = None) -> Point:
    if q is None:
        from .surfaces import sample_on_surface

        q = sample_on_surface("P_f", int(rng.integers(1 << 30)))
    return to_pure(_as_P(q))


@dataclass(frozen=True)
class PureChartCheck:
    H_gap: float
    displayed_gap: float
    pullback_gap: float


def pure_chart_check(q: Point, rng, tuples=3) -> PureChartCheck:
    """H and Omega_H across the chart change; displayed pure form against the momentum form."""
    qp = _as_P(q)
    r = to_pure(qp)
    H_gap = abs(H_pure(r) - float(primal(aux_H(qp.z))))
    om_m, om_d = omega_pure(r), omega_pure(r, displayed=True)
    om_P = omega_H_nonmomenta(from_pure(r))
    _, jac = jacobian(lambda w: from_pure_fn(Coords(P_PURE, w)), r.flat)
    jac = np.asarray(primal(jac))
    disp, pull = 0.0, 0.0
    for _ in range(tuples):
        vecs = [rng.standard_normal(P_PURE.size) for _ in range(4)]
        a = contract_form(vecs, om_m)
        disp = max(disp, float(np.abs(a - contract_form(vecs, om_d)).max()))
        b = contract_form(_pushed(vecs, jac), om_P) @ jac
        pull = max(pull, float(np.abs(a - b).max()))
    return PureChartCheck(H_gap, disp, pull)


def hfun_residuals(f_Gamma, G_p, r: Point):
    """Residuals of the pure-chart equations; f_Gamma[a,b,c,n], G_p[a,b,n] symmetric in (a, b)."""
    z = r.z
    _, dHp = jacobian(lambda v: H_pure_of(reshape(v, (10,))[PAIR_INDEX], z.Gamma),
                      np.asarray(z.p_sym)[PAIR_ROWS, PAIR_COLS])
    dHp = np.asarray(primal(dHp))[PAIR_INDEX]
    dHG = np.asarray(primal(jacobian(lambda v: H_pure_of(z.p_sym, reshape(v, (4, 4, 4))),
                                     np.asarray(z.Gamma).ravel())[1])).reshape(4, 4, 4)
    f = np.asarray(f_Gamma)
    sym = np.einsum("mabm->ab", f) + np.einsum("mbam->ab", f)
    tr = np.einsum("mmab->ab", f) + np.einsum("mmba->ab", f)
    h1 = dHp / MULT + sym / 6.0 - tr / 6.0
    Gp = np.asarray(G_p)
    h2 = dHG - THIRD * np.einsum("bca->abc", Gp) + THIRD * np.einsum("ba,mcm->abc", D, Gp)
    return h1, h2


def pure_solution_velocity(r: Point):
    """G^{ab}_n = -p^{am}G^b_{nm} - p^{bm}G^a_{nm} - 1/3 p^{ab} T^m_{mn} + p^{ab} G^m_{mn}."""
    z = r.z
    p, G = np.asarray(z.p_sym), np.asarray(z.Gamma)
    tau = np.asarray(primal(trace_torsion_of(G)))
    return (
        -np.einsum("am,bnm->abn", p, G)
        - np.einsum("bm,anm->abn", p, G)
        - THIRD * np.einsum("ab,n->abn", p, tau)
        + np.einsum("ab,mmn->abn", p, G)
    )


def pure_contraction_residual(f_Gamma, G_p, r: Point):
    """Covector of i(X)Omega_H in the pure chart for the multivector built from f_Gamma, G_p."""
    vecs = []
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = 1.0
        vecs.append(np.concatenate([e, np.asarray(f_Gamma)[..., nu].ravel(),
                                    np.asarray(G_p)[PAIR_ROWS, PAIR_COLS, nu]]))
    return contract_form(vecs, omega_pure(r))


@dataclass(frozen=True)
class PureSolutionCheck:
    hfun1: float
    hfun2: float
    contraction: float
    chart_velocity_gap: float


def pure_solution_check(q: Point, params: HamParams) -> PureSolutionCheck:
    qp = _as_P(q)
    r = to_pure(qp)
    fG = np.asarray(primal(ham_connection_velocity(qp.z.Gamma, params)))
    Gp = pure_solution_velocity(r)
    h1, h2 = hfun_residuals(fG, Gp, r)
    cov = pure_contraction_residual(fG, Gp, r)
    # the same multivector in the non-momenta chart pushed by the chart change
    fg = np.asarray(primal(premetric_combination(qp.z.g, qp.z.Gamma)))
    gap = 0.0
    for nu in range(4):
        v = np.concatenate([np.eye(4)[nu], fg[PAIR_ROWS, PAIR_COLS, nu], fG[..., nu].ravel()])
        _, w = directional(lambda u: to_pure_fn(Coords(P_NONMOMENTA, u)), qp.flat, v)
        gap = max(gap, float(np.abs(np.asarray(primal(w))[P_PURE.slices["p_sym"]]
                                    - Gp[PAIR_ROWS, PAIR_COLS, nu]).max()))
    return PureSolutionCheck(_max(h1), _max(h2), float(np.abs(cov).max()), gap)


# ------------------------------------------------------------------ gauge


def ham_gauge_field(layout, C):
    C = np.asarray(C, dtype=float)
    vec = np.zeros(layout.size)
    vec[layout.index_maps["Gamma"].ravel()] = np.einsum("b,ac->abc", C, D).ravel()
    return vec


def ham_torsion_field(layout, K):
    vec = np.zeros(layout.size)
    vec[layout.index_maps["Gamma"].ravel()] = np.asarray(K).ravel()
    return vec


def _t_of(layout):
    return lambda w: flatten(torsion_constraint_t(Coords(layout, w)))


def t_tangent_space(point: Point):
    _, jac = jacobian(_t_of(point.layout), point.flat)
    return null_space(np.asarray(primal(jac)))


def ham_gauge_checks(q: Point, C, rng, tuples=5) -> dict:
    """Trace gauge field in both charts: pullback of i(X)Omega_H and tangency to the final surface."""
    qp = _as_P(q)
    r = to_pure(qp)
    out = {}
    for name, point, omega in (("nonmomenta", qp, omega_H_nonmomenta(qp)), ("pure", r, omega_pure(r))):
        X = ham_gauge_field(point.layout, C)
        tangent, _ = t_tangent_space(point)
        form = omega.interior(X)
        val = 0.0
        for vecs in random_tangent_tuples(tangent, rng, tuples):
            val = max(val, abs(form.evaluate(vecs)))
        out[f"pullback_{name}"] = val
        _, der = directional(_t_of(point.layout), point.flat, X)
        out[f"tangency_{name}"] = _max(der)
    return out


def ham_torsion_candidate_check(q: Point, K) -> tuple[float, float]:
    qp = _as_P(q)
    _, der = directional(_t_of(P_NONMOMENTA), qp.flat, ham_torsion_field(P_NONMOMENTA, K))
    return _max(der), 2.0 * float(np.abs(K).max())


# -------------------------------------------------------------------- zeta


def zeta_fn(z):
    """P_Gamma (connection momenta) -> pure chart: p^{gm} = p_n^{ng,m}, symmetrized pair values."""
    p = einsum("nngm->gm", z.p_conn)
    return concat([z.x, flatten(z.Gamma), p[PAIR_ROWS, PAIR_COLS]])


def zeta_inverse_fn(z):
    p = z.p_sym
    return concat([z.x, flatten(z.Gamma), flatten(pure_momenta(p))])


def zeta_inverse(r: Point) -> Point:
    return Point(J1_STAR_CONN, np.asarray(primal(zeta_inverse_fn(r.z))))


def zeta(s: Point) -> Point:
    return Point(P_PURE, np.asarray(primal(zeta_fn(s.z))))


def p_gamma_constraints(s: Point) -> float:
    """p_a^{bc,m} - 1/3 delta^b_a p_n^{nm,c} + 1/3 delta^m_a p_n^{nb,c}, and symmetry of p_n^{na,b}."""
    pc = np.asarray(s.z.p_conn)
    tr = np.einsum("nnab->ab", pc)
    first = pc - THIRD * (np.einsum("ba,mc->abcm", D, tr) - np.einsum("ma,bc->abcm", D, tr))
    return max(_max(first), _max(tr - tr.T))


def _H_gamma_fn(z):
    p = einsum("nnab->ab", z.p_conn)
    return H_pure_of(p, z.Gamma)


def _conn_momenta_fn(z):
    return z.p_conn


_ZETA = {}


def omega_H_gamma(s: Point):
    if "omega" not in _ZETA:
        _ZETA["omega"] = poincare_cartan_spec(J1_STAR_CONN, _H_gamma_fn, _conn_momenta_fn)
    return _ZETA["omega"].at(s)


@dataclass(frozen=True)
class ZetaCheck:
    form_gap: float
    round_trip: float
    constraint: float
    identity_blocks: float


def zeta_equivalence_check(r: Point, rng, tuples=50) -> ZetaCheck:
    s = zeta_inverse(r)
    om_G = omega_H_gamma(s)
    om_P = omega_pure(r)
    _, jac = jacobian(lambda w: zeta_inverse_fn(Coords(P_PURE, w)), r.flat)
    jac = np.asarray(primal(jac))
    gap = 0.0
    for _ in range(tuples):
        vecs = [rng.standard_normal(P_PURE.size) for _ in range(4)]
        a = contract_form(_pushed(vecs, jac), om_G) @ jac
        b = contract_form(vecs, om_P)
        gap = max(gap, float(np.abs(a - b).max()))
    back = zeta(s)
    ident = max(_max(np.asarray(s.z.x) - np.asarray(r.z.x)), _max(np.asarray(s.z.Gamma) - np.asarray(r.z.Gamma)))
    return ZetaCheck(gap, float(np.abs(back.flat - r.flat).max()), p_gamma_constraints(s), ident)
