"""Einstein-Palatini Lagrangian quantities on J1: field equations, constraints, solutions.

Tensor index order in arrays follows the written index order, upper indices
first: Gamma[a, b, c] is Gamma^a_{bc}, dGamma[a, b, c, m] is Gamma^a_{bc,m},
L[a, b, c, m] is L_a^{bc,m}.  Partials with respect to the metric are taken with
respect to the ten independent coordinates g_{rs} (r <= s) and returned as
symmetric 4x4 blocks holding that value at both (r, s) and (s, r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import Differential, FormSpec, d3x_terms, volume_ids
from .jets import J1, Coords
from .tensor import (
    DELTA,
    MULT,
    PAIR_INDEX,
    PAIRS,
    add,
    einsum,
    jacobian,
    metric_aux,
    mul,
    neg,
    primal,
    reciprocal,
    reshape,
)

D = DELTA
THIRD = 1.0 / 3.0
# 1 where r <= s: turns a full-range sum over symmetric pairs into the ordered sum.
UPPER = np.triu(np.ones((4, 4)))
PAIR_ROWS, PAIR_COLS = np.array(PAIRS).T


def _aux(z: Coords):
    cache = z._cache
    if "_aux" not in cache:
        cache["_aux"] = metric_aux(z.g)
    return cache["_aux"]


# ------------------------------------------------------------ tensor formulas


def torsion_of(G):
    return add(G, neg(einsum("abc->acb", G)))


def trace_torsion_of(G):
    """T^l_{l m}."""
    return einsum("llm->m", torsion_of(G))


def ricci_of(G, dG):
    """R_ab = G^c_{ba,c} - G^c_{ca,b} + G^c_{ba} G^s_{sc} - G^c_{bs} G^s_{ca}."""
    return (
        einsum("cbac->ab", dG)
        - einsum("ccab->ab", dG)
        + einsum("cba,ssc->ab", G, G)
        - einsum("cbs,sca->ab", G, G)
    )


def hamiltonian_of(g, G):
    ginv, rho = metric_aux(g)
    quad = einsum("ab,cbs,sca->", ginv, G, G) - einsum("ab,cba,ssc->", ginv, G, G)
    return mul(rho, quad)


def momenta_of(g):
    """L_a^{bc,m} = rho (delta^m_a g^{bc} - delta^b_a g^{mc})."""
    ginv, rho = metric_aux(g)
    return mul(rho, einsum("ma,bc->abcm", D, ginv) - einsum("ba,mc->abcm", D, ginv))


def lagrangian_of(g, G, dG):
    ginv, rho = metric_aux(g)
    return mul(rho, einsum("ab,ab->", ginv, ricci_of(G, dG)))


def _gfull(gvec):
    return gvec[PAIR_INDEX]


def _gvec(g):
    return g[PAIR_ROWS, PAIR_COLS]


def metric_partial(fn, g):
    """d fn / d g_{rs} (independent coordinates) as trailing symmetric (4,4) axes."""
    _, der = jacobian(lambda gv: fn(_gfull(gv)), _gvec(g))
    nd = len(np.shape(primal(der))) - 1
    return der[(slice(None),) * nd + (PAIR_INDEX,)]


def gamma_partial(fn, G):
    _, der = jacobian(lambda gv: fn(reshape(gv, (4, 4, 4))), reshape(G, (64,)))
    nd = len(np.shape(primal(der))) - 1
    return reshape(der, tuple(np.shape(primal(der))[:nd]) + (4, 4, 4))


# -------------------------------------------------------------- on J1 chart


def ricci(z: Coords):
    return ricci_of(z.Gamma, z.dGamma)


def lagrangian_EP(z: Coords):
    return lagrangian_of(z.g, z.Gamma, z.dGamma)


def aux_L(z: Coords):
    return momenta_of(z.g)


def aux_H(z: Coords):
    return hamiltonian_of(z.g, z.Gamma)


def aux_H_definition(z: Coords):
    """H = L_a^{bc,m} Gamma^a_{bc,m} - L_EP."""
    return einsum("abcm,abcm->", aux_L(z), z.dGamma) - lagrangian_EP(z)


def dH_dg(z: Coords):
    G = z.Gamma
    return metric_partial(lambda g: hamiltonian_of(g, G), z.g)


def dL_dg(z: Coords):
    """dL_a^{bc,m}/dg_{rs}, axes (a, b, c, m, r, s)."""
    return metric_partial(momenta_of, z.g)


def dH_dGamma(z: Coords):
    g = z.g
    return gamma_partial(lambda G: hamiltonian_of(g, G), z.Gamma)


def torsion(z: Coords):
    return torsion_of(z.Gamma)


def trace_torsion(z: Coords):
    return trace_torsion_of(z.Gamma)


# ------------------------------------------- closed-form partials (cross-checks)


def dginv_closed(ginv):
    """d g^{ab} / d g_{rs}, independent coordinates, axes (a, b, r, s)."""
    full = einsum("ar,sb->abrs", ginv, ginv) + einsum("as,rb->abrs", ginv, ginv)
    return mul(-0.5 * MULT[None, None], full)


def drho_closed(ginv, rho):
    return mul(0.5 * MULT, mul(rho, ginv))


def dL_dg_closed(z: Coords):
    ginv, rho = _aux(z)
    dgi = dginv_closed(ginv)
    drho = drho_closed(ginv, rho)
    bracket = einsum("ma,bc->abcm", D, ginv) - einsum("ba,mc->abcm", D, ginv)
    dbracket = einsum("ma,bcrs->abcmrs", D, dgi) - einsum("ba,mcrs->abcmrs", D, dgi)
    return einsum("abcm,rs->abcmrs", bracket, drho) + mul(rho, dbracket)


def dH_dg_closed(z: Coords):
    ginv, rho = _aux(z)
    G = z.Gamma
    S = einsum("cbs,sca->ab", G, G) - einsum("cba,ssc->ab", G, G)
    return einsum("ab,ab,rs->rs", ginv, S, drho_closed(ginv, rho)) + mul(
        rho, einsum("abrs,ab->rs", dginv_closed(ginv), S)
    )


def dH_dGamma_closed(z: Coords):
    """rho [G^c_{a e} g^{e b} + g^{c e} G^b_{e a} - g^{c b} G^s_{s a} - delta^a_b g^{de} G^c_{ed}]."""
    ginv, rho = _aux(z)
    G = z.Gamma
    t1 = einsum("cae,eb->abc", G, ginv)
    t2 = einsum("ce,bea->abc", ginv, G)
    t3 = einsum("cb,ssa->abc", ginv, G)
    t4 = einsum("ab,de,ced->abc", D, ginv, G)
    return mul(rho, t1 + t2 - t3 - t4)


def ricci_loop(G, dG):
    """Naive loop reference for the Ricci tensor."""
    R = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            s = 0.0
            for c in range(4):
                s += dG[c, b, a, c] - dG[c, c, a, b]
                for e in range(4):
                    s += G[c, b, a] * G[e, e, c] - G[c, b, e] * G[e, c, a]
            R[a, b] = s
    return R


# -------------------------------------------------------- Poincare-Cartan form


def _fn_H(z):
    return aux_H(z)


def _fn_L(z):
    return aux_L(z)


def poincare_cartan_spec(layout=J1, hamiltonian=_fn_H, momenta=_fn_L) -> FormSpec:
    """Omega = dH ^ d4x - dL_a^{bc,m} ^ dGamma^a_{bc} ^ d3x_m."""
    terms = [(1.0, (Differential("H", hamiltonian),) + volume_ids())]
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for m in range(4):
                    sign, rest = d3x_terms(m)
                    terms.append(
                        (-float(sign), (Differential("L", momenta, (a, b, c, m)), f"Gamma_{a}_{b}_{c}") + rest)
                    )
    return FormSpec(layout, 5, terms)


def theta_spec(layout=J1, hamiltonian=_fn_H, momenta=_fn_L) -> FormSpec:
    """Theta = -H d4x + L_a^{bc,m} dGamma^a_{bc} ^ d3x_m."""
    terms = [(("negH", lambda z: neg(hamiltonian(z)), ()), volume_ids())]
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for m in range(4):
                    sign, rest = d3x_terms(m)
                    terms.append(
                        ((f"L{sign:+d}", _signed(momenta, sign), (a, b, c, m)), (f"Gamma_{a}_{b}_{c}",) + rest)
                    )
    return FormSpec(layout, 4, terms)


def _signed(fn, sign):
    return lambda z: mul(float(sign), fn(z))


_OMEGA_SPEC = None
_THETA_SPEC = None


def poincare_cartan(p):
    """Omega_{L_EP} evaluated at p (a J1 or J2 point)."""
    global _OMEGA_SPEC
    if _OMEGA_SPEC is None:
        _OMEGA_SPEC = poincare_cartan_spec()
    return _OMEGA_SPEC.at(p)


def theta(p):
    global _THETA_SPEC
    if _THETA_SPEC is None:
        _THETA_SPEC = theta_spec()
    return _THETA_SPEC.at(p)


# ---------------------------------------------------------- field equations


@dataclass(frozen=True)
class FieldCoefficients:
    """Coefficients of X_nu: f_g[r,s,nu], f_Gamma[a,b,c,nu], f_dg[r,s,m,nu], f_dGamma[a,b,c,m,nu]."""

    f_g: np.ndarray
    f_Gamma: np.ndarray
    f_dg: np.ndarray | None = None
    f_dGamma: np.ndarray | None = None

    @classmethod
    def zeros(cls):
        return cls(np.zeros((4, 4, 4)), np.zeros((4, 4, 4, 4)), np.zeros((4,) * 4), np.zeros((4,) * 5))

    @classmethod
    def random(cls, rng):
        fg = rng.uniform(-1, 1, (4, 4, 4))
        fdg = rng.uniform(-1, 1, (4, 4, 4, 4))
        return cls(
            fg + fg.transpose(1, 0, 2),
            rng.uniform(-1, 1, (4, 4, 4, 4)),
            fdg + fdg.transpose(1, 0, 2, 3),
            rng.uniform(-1, 1, (4,) * 5),
        )

    def vectors(self, layout=J1):
        """Dense components of X_0..X_3 on the J1 chart (or the E chart)."""
        out = []
        for nu in range(4):
            x = np.zeros(4)
            x[nu] = 1.0
            parts = [x, self.f_g[PAIR_ROWS, PAIR_COLS, nu], self.f_Gamma[..., nu].reshape(-1)]
            if "dg" in layout:
                fdg = np.zeros((4, 4, 4)) if self.f_dg is None else self.f_dg[..., nu]
                fdG = np.zeros((4, 4, 4, 4)) if self.f_dGamma is None else self.f_dGamma[..., nu]
                parts += [fdg[PAIR_ROWS, PAIR_COLS].reshape(-1), fdG.reshape(-1)]
            out.append(np.concatenate(parts))
        return out


def field_eq_residuals(coeffs: FieldCoefficients, z: Coords):
    """(res3[mu], res4[s,r], res5[a,b,c]) of the three local field equations."""
    dHg = dH_dg(z)
    dHG = dH_dGamma(z)
    dLg = dL_dg(z)
    fg, fG = coeffs.f_g, coeffs.f_Gamma
    res4 = dHg - einsum("abcm,abcmrs->rs", fG, dLg)
    res5 = dHG + einsum("rsm,rs,abcmrs->abc", fg, UPPER, dLg)
    # W[a,b,c,n,nu] = i(X_nu) dL_a^{bc,n}
    W = einsum("rsv,rs,abcnrs->abcnv", fg, UPPER, dLg)
    iXdH = einsum("rsm,rs,rs->m", fg, UPPER, dHg) + einsum("abcm,abc->m", fG, dHG)
    res3 = iXdH + einsum("abcm,abcnn->m", fG, W) - einsum("abcn,abcnm->m", fG, W)
    return res3, res4, res5


def field_eq_residuals_loop(coeffs: FieldCoefficients, dHg, dHG, dLg):
    """Naive assembly of the connection and metric equations."""
    fg, fG = coeffs.f_g, coeffs.f_Gamma
    res4 = np.array(dHg, dtype=float)
    res5 = np.array(dHG, dtype=float)
    for r in range(4):
        for s in range(4):
            for a in range(4):
                for b in range(4):
                    for c in range(4):
                        for m in range(4):
                            res4[r, s] -= fG[a, b, c, m] * dLg[a, b, c, m, r, s]
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for m in range(4):
                    for r, s in PAIRS:
                        res5[a, b, c] += fg[r, s, m] * dLg[a, b, c, m, r, s]
    return res4, res5


# ------------------------------------------------------------- constraints


def torsion_constraint_A(z: Coords):
    """A_{abc} = g_{bn}T^n_{ac} - g_{an}T^n_{bc} + 1/3 g_{bc} T^n_{na} - 1/3 g_{ac} T^n_{nb}."""
    g = z.g
    T = torsion(z)
    tau = einsum("nna->a", T)
    return (
        einsum("bn,nac->abc", g, T)
        - einsum("an,nbc->abc", g, T)
        + THIRD * einsum("bc,a->abc", g, tau)
        - THIRD * einsum("ac,b->abc", g, tau)
    )


def trace_free_part(T):
    """T^a_{bc} - 1/3 delta^a_b T^n_{nc} + 1/3 delta^a_c T^n_{nb} (for any trailing axes)."""
    tau = einsum("nnc->c", T) if len(np.shape(primal(T))) == 3 else einsum("nncv->cv", T)
    if len(np.shape(primal(T))) == 3:
        return T - THIRD * einsum("ab,c->abc", D, tau) + THIRD * einsum("ac,b->abc", D, tau)
    return T - THIRD * einsum("ab,cv->abcv", D, tau) + THIRD * einsum("ac,bv->abcv", D, tau)


def torsion_constraint_t(z: Coords):
    return trace_free_part(torsion(z))


def premetric_combination(g, G):
    """P_{rs,m} = g_{sl}G^l_{mr} + g_{rl}G^l_{ms} + 2/3 g_{rs} T^l_{lm}."""
    tau = trace_torsion_of(G)
    return einsum("sl,lmr->rsm", g, G) + einsum("rl,lms->rsm", g, G) + (2.0 / 3.0) * einsum("rs,m->rsm", g, tau)


def premetricity_m(z: Coords):
    return z.dg - premetric_combination(z.g, z.Gamma)


def covariant_metric_derivative(z: Coords):
    """(nabla g)_{rs,m} = g_{rs,m} - g_{sl}G^l_{mr} - g_{rl}G^l_{ms}."""
    g, G = z.g, z.Gamma
    return z.dg - einsum("sl,lmr->rsm", g, G) - einsum("rl,lms->rsm", g, G)


def torsion_velocity(z: Coords):
    dG = z.dGamma
    return dG - einsum("abcm->acbm", dG)


def tangency_r(z: Coords):
    return trace_free_part(torsion_velocity(z))


def euler_lagrange_c(z: Coords):
    """c^{rs} = dH/dg_{rs} - dL_a^{bc,m}/dg_{rs} Gamma^a_{bc,m}."""
    return dH_dg(z) - einsum("abcmrs,abcm->rs", dL_dg(z), z.dGamma)


def integrability_i(z: Coords):
    """i_{rs,mn} from the pure-coordinate form; axes (r, s, m, n)."""
    g, G, dG = z.g, z.Gamma, z.dGamma
    # Q^c_{nm s} = G^c_{nl} G^l_{ms} - G^c_{ml} G^l_{ns}
    Q = einsum("cnl,lms->cmns", G, G)
    Q = Q - einsum("cmns->cnms", Q)
    quad = einsum("rc,cmns->rsmn", g, Q) + einsum("sc,cmnr->rsmn", g, Q)
    # V^l_{ms,n} = G^l_{ms,n} - G^l_{ns,m}
    V = dG - einsum("lnsm->lmsn", dG)
    lin = einsum("rl,lmsn->rsmn", g, V) + einsum("sl,lmrn->rsmn", g, V)
    dtau = einsum("llmn->mn", torsion_velocity(z))
    tr = (2.0 / 3.0) * einsum("rs,mn->rsmn", g, dtau - einsum("mn->nm", dtau))
    return quad + lin + tr


FAMILIES = {
    "A": torsion_constraint_A,
    "t": torsion_constraint_t,
    "c": euler_lagrange_c,
    "m": premetricity_m,
    "r": tangency_r,
    "i": integrability_i,
}


def constraints(p, family: str):
    """Constraint tensor of the named family at a point (or Coords)."""
    if family not in FAMILIES:
        raise KeyError(f"unknown constraint family {family!r}; expected one of {sorted(FAMILIES)}")
    z = p if isinstance(p, Coords) else p.z
    return FAMILIES[family](z)


def constraint_vector(z: Coords, families=("c", "m", "t", "r", "i")):
    """All requested families flattened into one vector (for Jacobians)."""
    from .tensor import concat, flatten

    return concat([flatten(FAMILIES[f](z)) for f in families])


# ---------------------------------------------------------------- beth


def beth(z: Coords):
    """Right inverse of dL/dg in the metric equations, axes (a, b, c, l, z, n).

    Overall sign chosen so that dL/dg . beth is +n(rs)/2 times the symmetrized deltas.
    """
    g = z.g
    _, rho = _aux(z)
    t = (
        0.5 * einsum("bc,lz,na->abclzn", g, g, D)
        - (1.0 / 6.0) * einsum("lz,nc,ba->abclzn", g, g, D)
        + THIRD * einsum("ln,zc,ba->abclzn", g, g, D)
        - einsum("zc,lb,na->abclzn", g, g, D)
    )
    return mul(reciprocal(rho), t)


def beth_identity_rhs():
    """(n(rs)/2)(delta^m_n delta^s_z delta^r_l + delta^m_n delta^s_l delta^r_z), axes (m, r, s, l, z, n)."""
    full = einsum("mn,sz,rl->mrslzn", D, D, D) + einsum("mn,sl,rz->mrslzn", D, D, D)
    return 0.5 * MULT[None, :, :, None, None, None] * full


def beth_identity_residual(z: Coords) -> float:
    lhs = einsum("abcmrs,abclzn->mrslzn", dL_dg(z), beth(z))
    return float(np.abs(primal(lhs) - beth_identity_rhs()).max())


def beth_torsion_residual(z: Coords) -> float:
    """Antisymmetrized beth . dH/dGamma against minus the torsion-constraint tensor."""
    contracted = einsum("abclzn,abc->lzn", beth(z), dH_dGamma(z))
    lhs = contracted - einsum("lzn->zln", contracted)
    # -(g_{lm}T^m_{zn} - g_{zm}T^m_{ln} + 1/3 g_{ln}T^m_{mz} - 1/3 g_{zn}T^m_{ml}) = -A_{z l n}
    rhs = -einsum("zln->lzn", torsion_constraint_A(z))
    return float(np.abs(primal(lhs) - primal(rhs)).max())
