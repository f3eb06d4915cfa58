"""Bridge to the first-order Einstein-Hilbert description on J1 of the metric bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import Differential, FormSpec, contract_form, d3x_terms, volume_ids
from .hamiltonian import (
    HamParams,
    _as_P,
    omega_H_nonmomenta,
    ham_connection_velocity,
    t_tangent_space,
)
from .jets import J1, P_NONMOMENTA, SIGMA_J1, Coords, Point
from .lagrangian import constraint_vector, premetric_combination
from .solutions import _max, null_space, random_tangent_tuples
from .tensor import (
    ETA,
    MULT,
    PAIR_INDEX,
    PAIRS,
    SingularMetricError,
    add,
    concat,
    einsum,
    flatten,
    inv,
    jacobian,
    metric_aux,
    mul,
    neg,
    primal,
    reshape,
)

PAIR_ROWS, PAIR_COLS = np.array(PAIRS).T


# ------------------------------------------------------------ Levi-Civita


def levi_civita(g, dg):
    """Christoffel symbols G~^m_{ac} = 1/2 g^{ml}(g_{la,c} + g_{lc,a} - g_{ac,l}); dg[r, s, m] = g_{rs,m}."""
    ginv = inv(g)
    low = einsum("lac->lac", dg) + einsum("lca->lac", dg) - einsum("acl->lac", dg)
    return mul(0.5, einsum("ml,lac->mac", ginv, low))


def metricity_residual(g, dg, G) -> float:
    nabla = np.asarray(dg) - np.einsum("sl,lmr->rsm", g, G) - np.einsum("rl,lms->rsm", g, G)
    return _max(nabla)


# ------------------------------------------------------ first-order Lagrangian


def density_tensor(g):
    """L^{ab,mn} = n(ab)/2 rho (g^{am}g^{bn} + g^{an}g^{bm} - 2 g^{ab}g^{mn})."""
    ginv, rho = metric_aux(g)
    core = einsum("am,bn->abmn", ginv, ginv) + einsum("an,bm->abmn", ginv, ginv) - 2.0 * einsum(
        "ab,mn->abmn", ginv, ginv
    )
    return mul(rho, einsum("ab,abmn->abmn", 0.5 * MULT, core))


def lagrangian_zero(g, dg):
    """L_0 = rho g^{ab}{g^{cd}(g_{dm,b}G~^m_{ac} - g_{dm,c}G~^m_{ab}) + G~^d_{ab}G~^c_{cd} - G~^d_{ac}G~^c_{bd}}."""
    ginv, rho = metric_aux(g)
    G = levi_civita(g, dg)
    lin = einsum("ab,cd,dmb,mac->", ginv, ginv, dg, G) - einsum("ab,cd,dmc,mab->", ginv, ginv, dg, G)
    quad = einsum("ab,dab,ccd->", ginv, G, G) - einsum("ab,dac,cbd->", ginv, G, G)
    return mul(rho, add(lin, quad))


def lagrangian_bar_of(g, dg):
    """L_0 minus the ordered-pair sum of g_{ab,m} g_{ls,n} dL^{ab,mn}/dg_{ls}."""
    gv = g[PAIR_ROWS, PAIR_COLS]
    _, der = jacobian(lambda v: density_tensor(v[PAIR_INDEX]), gv)  # (4,4,4,4,10)
    dv = dg[PAIR_ROWS, PAIR_COLS]  # (10, 4)
    dL = der[PAIR_ROWS, PAIR_COLS]  # (10, 4, 4, 10)
    return add(lagrangian_zero(g, dg), neg(einsum("km,jn,kmnj->", dv, dv, dL)))


def lagrangian_bar(s: Point) -> float:
    return float(primal(lagrangian_bar_of(s.z.g, s.z.dg)))


def lagrangian_bar_assembled(g, dg) -> float:
    """Full-range assembly with closed-form symmetric metric derivatives and loop Christoffels."""
    g = np.asarray(g, float)
    dg = np.asarray(dg, float)
    gi = np.linalg.inv(g)
    rho = np.sqrt(abs(np.linalg.det(g)))
    G = np.zeros((4, 4, 4))
    for m in range(4):
        for a in range(4):
            for c in range(4):
                G[m, a, c] = 0.5 * sum(gi[m, l] * (dg[l, a, c] + dg[l, c, a] - dg[a, c, l]) for l in range(4))
    L0 = 0.0
    for a in range(4):
        for b in range(4):
            inner = 0.0
            for c in range(4):
                for d in range(4):
                    inner += gi[c, d] * sum(dg[d, m, b] * G[m, a, c] - dg[d, m, c] * G[m, a, b] for m in range(4))
                inner += sum(G[d, a, b] * G[c, c, d] - G[d, a, c] * G[c, b, d] for d in range(4))
            L0 += gi[a, b] * inner
    L0 *= rho
    # symmetric derivatives: d rho = rho/2 g^{ls}, d g^{ab} = -1/2 (g^{al}g^{sb} + g^{as}g^{lb})
    dginv = -0.5 * (np.einsum("al,sb->abls", gi, gi) + np.einsum("as,lb->abls", gi, gi))
    drho = 0.5 * rho * gi

    M = np.einsum("am,bn->abmn", gi, gi) + np.einsum("an,bm->abmn", gi, gi) - 2 * np.einsum("ab,mn->abmn", gi, gi)
    dM = (
        np.einsum("amls,bn->abmnls", dginv, gi) + np.einsum("am,bnls->abmnls", gi, dginv)
        + np.einsum("anls,bm->abmnls", dginv, gi) + np.einsum("an,bmls->abmnls", gi, dginv)
        - 2 * np.einsum("abls,mn->abmnls", dginv, gi) - 2 * np.einsum("ab,mnls->abmnls", gi, dginv)
    )
    dfull = np.einsum("ls,abmn->abmnls", drho, M) + rho * dM
    # sum over a<=b with n(ab)/2 equals half the full sum; sum over l<=s of the coordinate
    # derivative equals the full sum of the symmetric derivative
    corr = 0.5 * np.einsum("abm,lsn,abmnls->", dg, dg, dfull)
    return float(L0 - corr)


def momenta_bar_of(g, dg):
    """dL-bar / dg_{ab,m} with respect to the independent coordinates; axes (pair, m)."""
    dv = dg[PAIR_ROWS, PAIR_COLS]
    _, der = jacobian(lambda v: lagrangian_bar_of(g, reshape(v, (10, 4))[PAIR_INDEX]), flatten(dv))
    return reshape(der, (10, 4))


def energy_bar_of(g, dg):
    """g_{ab,m} dL-bar/dg_{ab,m} - L-bar, ordered pairs."""
    dv = dg[PAIR_ROWS, PAIR_COLS]
    return add(einsum("km,km->", dv, momenta_bar_of(g, dg)), neg(lagrangian_bar_of(g, dg)))


def omega_bar_spec() -> FormSpec:
    """dL-bar ^ d4x - d(dL-bar/dg_{ab,m}) ^ dg_ab ^ d3x_m on J1 of the metric bundle."""
    terms = [(1.0, (Differential("L", lambda z: lagrangian_bar_of(z.g, z.dg)),) + volume_ids())]
    for k, (a, b) in enumerate(PAIRS):
        for m in range(4):
            sign, rest = d3x_terms(m)
            momentum = Differential("P", lambda z: momenta_bar_of(z.g, z.dg), (k, m))
            terms.append((-float(sign), (momentum, f"g_{a}{b}") + rest))
    return FormSpec(SIGMA_J1, 5, terms)


_BAR = {}


def omega_bar(s: Point):
    if "omega" not in _BAR:
        _BAR["omega"] = omega_bar_spec()
    return _BAR["omega"].at(s)


# -------------------------------------------------------------------- xi


def xi_fn(z):
    """(x, g, Gamma) -> (x, g, g_{al}G^l_{cb} + g_{bl}G^l_{ca} + 2/3 g_{ab}T^l_{lc})."""
    dg = premetric_combination(z.g, z.Gamma)
    return concat([z.x, z.g[PAIR_ROWS, PAIR_COLS], flatten(dg[PAIR_ROWS, PAIR_COLS])])


def xi_map(q: Point) -> Point:
    return Point(SIGMA_J1, np.asarray(primal(xi_fn(_as_P(q).z))))


def xi_jacobian(q: Point):
    qp = _as_P(q)
    _, jac = jacobian(lambda w: xi_fn(Coords(P_NONMOMENTA, w)), qp.flat)
    return np.asarray(primal(jac))


def gauge_shift(q: Point, C) -> Point:
    qp = _as_P(q)
    return qp.replace(Gamma=qp.Gamma + np.einsum("b,ac->abc", np.asarray(C, float), np.eye(4)))


# ----------------------------------------------------------- reconstruction


class DimensionError(ValueError):
    pass


def reconstruct_connection(g, dg, C, m=None):
    """The unique connection with pre-metricity, trace-form torsion and G^l_{al} = C_a in dimension m."""
    m = int(np.shape(primal(g))[0]) if m is None else m
    if m < 2:
        raise DimensionError("reconstruction needs dimension m >= 2")
    if np.shape(primal(g)) != (m, m):
        raise DimensionError(f"metric shape {np.shape(primal(g))} does not match m={m}")
    if abs(np.linalg.det(np.asarray(primal(g)))) < 1e-12:
        raise SingularMetricError("degenerate metric in reconstruction")
    ginv = inv(g)
    I = np.eye(m)
    low = einsum("rms->mrs", dg) + einsum("smr->mrs", dg) - einsum("rsm->mrs", dg)
    christ = mul(0.5, einsum("am,mrs->ars", ginv, low))
    tr = einsum("mn,mnr->r", ginv, dg)
    return christ - (1.0 / (2 * m)) * einsum("r,as->ars", tr, I) + (1.0 / m) * einsum("r,as->ars", C, I)


def reconstruction_residuals(g, dg, C, G) -> dict:
    """The three defining conditions in dimension m."""
    g, dg, C, G = (np.asarray(primal(a)) for a in (g, dg, C, G))
    m = g.shape[0]
    T = G - G.transpose(0, 2, 1)
    tau = np.einsum("llm->m", T)
    nabla = dg - np.einsum("sl,lmr->rsm", g, G) - np.einsum("rl,lms->rsm", g, G)
    I = np.eye(m)
    return {
        "premetricity": _max(nabla - 2.0 / (m - 1) * np.einsum("rs,m->rsm", g, tau)),
        "torsion": _max(T - (np.einsum("ab,c->abc", I, tau) - np.einsum("ac,b->abc", I, tau)) / (m - 1)),
        "gauge": _max(np.einsum("ala->l", G) - C),
    }


def reconstruct_from_sigma(s: Point, C) -> Point:
    """Non-momenta point over a J1 metric point with gauge functions C."""
    z = s.z
    G = np.asarray(primal(reconstruct_connection(z.g, z.dg, np.asarray(C, float))))
    return Point(P_NONMOMENTA, np.concatenate([s.x, z.g[PAIR_ROWS, PAIR_COLS], G.ravel()]))


# ------------------------------------------------------- kernel and rank


@dataclass(frozen=True)
class KernelRank:
    t_rank: int
    tangent_dim: int
    rank: int
    kernel_dim: int
    kernel_angle: float


def trace_directions(layout=P_NONMOMENTA):
    out = np.zeros((layout.size, 4))
    idx = layout.index_maps["Gamma"]
    for b in range(4):
        for a in range(4):
            out[idx[a, b, a], b] = 1.0
    return out


def subspace_gap(A, B) -> float:
    """Largest principal-angle sine between the column spans of A and B."""
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    if qa.shape[1] != qb.shape[1]:
        return 1.0
    return float(np.linalg.norm(qa - qb @ (qb.T @ qa), 2))


def kernel_and_rank_checks(q: Point, rtol=1e-9) -> KernelRank:
    qp = _as_P(q)
    tangent, t_rank = t_tangent_space(qp)
    restricted = xi_jacobian(qp) @ tangent
    kern, rank = null_space(restricted, rtol)
    return KernelRank(t_rank, tangent.shape[1], rank, kern.shape[1], subspace_gap(tangent @ kern, trace_directions()))


# ---------------------------------------------------------- form equivalence


@dataclass(frozen=True)
class FormEquivalence:
    deviation: float
    scale: float
    kernel_value: float


def _unit_tuples(basis, rng, count, k):
    for vecs in random_tangent_tuples(basis, rng, count, k):
        yield [v / np.linalg.norm(v) for v in vecs]


def form_equivalence_check(q: Point, rng, tuples=50, tangent=None) -> FormEquivalence:
    """Omega_H at q against xi^* Omega_L-bar on unit P_f-tangent 5-tuples."""
    qp = _as_P(q)
    if tangent is None:
        tangent, _ = t_tangent_space(qp)
    s = xi_map(qp)
    jac = xi_jacobian(qp)
    om_H, om_L = omega_H_nonmomenta(qp), omega_bar(s)
    dev = scale = 0.0
    for vecs in _unit_tuples(tangent, rng, tuples, 5):
        a = contract_form(vecs[:4], om_H) @ vecs[4]
        pushed = [jac @ v for v in vecs]
        b = contract_form(pushed[:4], om_L) @ pushed[4]
        dev, scale = max(dev, abs(a - b)), max(scale, abs(a))
    kern, _ = null_space(jac @ tangent, 1e-9)
    vecs = [tangent @ kern[:, 0]] + next(_unit_tuples(tangent, rng, 1, 4))
    kv = abs(contract_form([jac @ v for v in vecs[:4]], om_L) @ (jac @ vecs[4]))
    return FormEquivalence(dev, scale, kv)


def form_equivalence_offsurface(q: Point, rng, tuples=5) -> float:
    """Same comparison with generic vectors at a generic point (diagnostic only)."""
    qp = _as_P(q)
    basis = np.eye(P_NONMOMENTA.size)
    return form_equivalence_check(qp, rng, tuples, tangent=basis).deviation


# ------------------------------------------------------------ comparison table


def eh_second_derivatives(q: Point, params: HamParams):
    """F_{ab;m,n} = X_n(g-bar_{ab,m}) for the pushed Hamiltonian solution; axes (a, b, m, n)."""
    qp = _as_P(q)
    z = qp.z
    fg = premetric_combination(z.g, z.Gamma)
    fG = ham_connection_velocity(z.Gamma, params)
    g, G = np.asarray(z.g), np.asarray(z.Gamma)
    _, dP = jacobian(
        lambda v: premetric_combination(reshape(v[:16], (4, 4)), reshape(v[16:], (4, 4, 4))),
        np.concatenate([g.ravel(), G.ravel()]),
        np.concatenate([np.asarray(primal(fg)).reshape(16, 4), np.asarray(primal(fG)).reshape(64, 4)]),
    )
    return np.asarray(primal(dP))


def homogeneous_part(q: Point, F, coefficient=1.0):
    """F^h = F - c g_{ls}(G~^l_{na}G~^s_{mb} + G~^l_{nb}G~^s_{ma}) with the Levi-Civita symbols of xi(q)."""
    s = xi_map(q)
    g = np.asarray(s.z.g)
    Gt = np.asarray(primal(levi_civita(g, s.z.dg)))
    quad = np.einsum("ls,lna,smb->abmn", g, Gt, Gt) + np.einsum("ls,lnb,sma->abmn", g, Gt, Gt)
    return F - coefficient * quad


def levi_civita_ricci(q: Point, F):
    """Ricci tensor of the Levi-Civita connection along second derivatives g_{ab,mn} = F[a, b, m, n]."""
    s = xi_map(q)
    g, dg = np.asarray(s.z.g), np.asarray(s.z.dg)
    seeds = np.concatenate([dg.reshape(16, 4), np.asarray(F).reshape(64, 4)])
    Gt, dGt = jacobian(
        lambda v: levi_civita(reshape(v[:16], (4, 4)), reshape(v[16:], (4, 4, 4))),
        np.concatenate([g.ravel(), dg.ravel()]),
        seeds,
    )
    Gt, dGt = np.asarray(Gt), np.asarray(dGt)
    return (
        np.einsum("cbac->ab", dGt)
        - np.einsum("ccab->ab", dGt)
        + np.einsum("cba,ssc->ab", Gt, Gt)
        - np.einsum("cbs,sca->ab", Gt, Gt)
    )


def comparison_table_check(q: Point, params: HamParams, coefficient=1.0) -> dict:
    """Right-column residuals of the K / F^h comparison table, plus the vacuum equations themselves."""
    qp = _as_P(q)
    F = eh_second_derivatives(qp, params)
    Fh = homogeneous_part(qp, F, coefficient)
    ginv = np.linalg.inv(np.asarray(qp.z.g))
    trace = np.einsum(
        "ab,etab->et",
        ginv,
        np.einsum("etab->etab", Fh)
        + np.einsum("abet->etab", Fh)
        - np.einsum("aetb->etab", Fh)
        - np.einsum("ateb->etab", Fh),
    )
    return {
        "pair_symmetry": _max(Fh - Fh.transpose(1, 0, 2, 3)),
        "derivative_symmetry": _max(Fh - Fh.transpose(0, 1, 3, 2)),
        "trace_equation": _max(trace),
        "ricci": _max(levi_civita_ricci(qp, F)),
    }


# ---------------------------------------------------------- integrability


def frame_of(g):
    """J with J^T eta J = g (Lorentzian g)."""
    w, V = np.linalg.eigh(np.asarray(g, float))
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    if not (w[0] < 0 < w[1]):
        raise ValueError("metric is not Lorentzian")
    return (V * np.sqrt(np.abs(w))).T


@dataclass(frozen=True)
class FlatGerm:
    """g(y) = dPhi^T eta dPhi with Phi^a = J^a_m y^m + 1/2 J^a_k G~^k_{ml} y^m y^l, y = x - x0."""

    x0: np.ndarray
    J: np.ndarray
    Gt: np.ndarray
    C: np.ndarray

    def metric(self, x):
        y = add(x, -self.x0)
        dphi = add(self.J, einsum("ak,kml,l->am", self.J, self.Gt, y))
        return einsum("am,ab,bn->mn", dphi, ETA, dphi)

    def metric_derivative(self, x):
        """g_{rs,m}(x); axes (r, s, m)."""
        y = add(x, -self.x0)
        dphi = add(self.J, einsum("ak,kml,l->am", self.J, self.Gt, y))
        ddphi = einsum("ak,kml->aml", self.J, self.Gt)
        t = einsum("arm,ab,bs->rsm", ddphi, ETA, dphi)
        return add(t, einsum("srm->rsm", t))

    def connection(self, x):
        return reconstruct_connection(self.metric(x), self.metric_derivative(x), self.C)

    def jet(self, x) -> Point:
        """1-jet of the lifted section at x, as a J1 point."""
        x = np.asarray(x, float)
        G, dG = jacobian(self.connection, x)
        g = np.asarray(primal(self.metric(x)))
        dg = np.asarray(primal(self.metric_derivative(x)))
        return Point(
            J1,
            np.concatenate(
                [x, g[PAIR_ROWS, PAIR_COLS], np.asarray(G).ravel(), dg[PAIR_ROWS, PAIR_COLS].ravel(),
                 np.asarray(dG).ravel()]
            ),
        )


def flat_germ(q: Point) -> FlatGerm:
    qp = _as_P(q)
    s = xi_map(qp)
    g = np.asarray(s.z.g)
    Gt = np.asarray(primal(levi_civita(g, s.z.dg)))
    C = np.einsum("ala->l", qp.Gamma)
    return FlatGerm(np.asarray(qp.x, float), frame_of(g), Gt, C)


@dataclass(frozen=True)
class IntegrabilityWitness:
    center: float
    constraints: float
    probes: int


def integrability_witness(q: Point, rng, probes=20, radius=0.01) -> IntegrabilityWitness:
    qp = _as_P(q)
    germ = flat_germ(qp)
    center = germ.jet(qp.x).restrict(P_NONMOMENTA)
    worst = 0.0
    for _ in range(probes):
        d = rng.standard_normal(4)
        d *= radius * rng.uniform() ** 0.25 / np.linalg.norm(d)
        p = germ.jet(qp.x + d)
        worst = max(worst, _max(constraint_vector(p.z)))
    return IntegrabilityWitness(float(np.abs(center.flat - qp.flat).max()), worst, probes)
