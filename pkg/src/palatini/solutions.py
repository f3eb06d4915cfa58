"""Solutions of the Lagrangian field equations, their tangency, integrability and symmetries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import VectorField, bracket
from .jets import E, J1, Coords, Point
from .lagrangian import (
    FAMILIES,
    THIRD,
    UPPER,
    D,
    FieldCoefficients,
    constraint_vector,
    dH_dg,
    dH_dGamma,
    dL_dg,
    field_eq_residuals,
    lagrangian_EP,
    premetric_combination,
    torsion_velocity,
    trace_free_part,
    trace_torsion_of,
)
from .tensor import PAIRS, concat, directional, einsum, flatten, jacobian, primal, reshape

CONSISTENT = 1e-7
PAIR_ROWS, PAIR_COLS = np.array(PAIRS).T


class InconsistentSystemError(RuntimeError):
    """A linear system that should be solvable left a least-squares residual."""

    def __init__(self, what, residual):
        super().__init__(f"{what}: least-squares residual {residual:.3e}")
        self.residual = residual


class InvalidParamsError(ValueError):
    pass


def _j1(p: Point) -> Point:
    return p if p.layout is J1 else p.restrict(J1)


def _max(x) -> float:
    x = np.asarray(primal(x))
    return float(np.abs(x).max()) if x.size else 0.0


def null_space(A, rtol=1e-10):
    """Orthonormal kernel basis (columns) and numeric rank."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T, rank


def lstsq_affine(fn, n):
    """Matrix M and offset b of an affine map v -> M v + b on R^n."""
    b, M = jacobian(fn, np.zeros(n))
    return np.asarray(primal(M)).reshape(-1, n), np.asarray(primal(b)).reshape(-1)


class AffineSolutions:
    """Solution set of M v + b = 0: minimal-norm particular point plus kernel basis (one SVD)."""

    def __init__(self, M, b):
        u, s, vt = np.linalg.svd(M, full_matrices=True)
        rank = int(np.sum(s > 1e-10 * s[0]))
        self.particular = -vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank])
        self.kernel = vt[rank:].T
        self.residual = float(np.abs(M @ self.particular + b).max())

    def draw(self, rng=None):
        if rng is None or self.kernel.shape[1] == 0:
            return self.particular.copy()
        return self.particular + self.kernel @ rng.standard_normal(self.kernel.shape[1])


def solve_affine(M, b, rng=None):
    """Least-squares solution of M v + b = 0, plus a random kernel vector when ``rng`` is given."""
    sol = AffineSolutions(M, b)
    v = sol.draw(rng)
    return v, float(np.abs(M @ v + b).max())


# ------------------------------------------------------ torsion equivalence


def torsion_A_of(g, T):
    tau = einsum("nna->a", T)
    return (
        einsum("bn,nac->abc", g, T)
        - einsum("an,nbc->abc", g, T)
        + THIRD * einsum("bc,a->abc", g, tau)
        - THIRD * einsum("ac,b->abc", g, tau)
    )


def torsion_from_trace(tau):
    tau = np.asarray(tau, dtype=float)
    return THIRD * (einsum("ab,c->abc", D, tau) - einsum("ac,b->abc", D, tau))


def antisymmetric_basis():
    """Basis of tensors T^a_{bc} antisymmetric in (b, c), shape (24, 4, 4, 4)."""
    out = []
    for a in range(4):
        for b in range(4):
            for c in range(b + 1, 4):
                t = np.zeros((4, 4, 4))
                t[a, b, c], t[a, c, b] = 1.0, -1.0
                out.append(t)
    return np.array(out)


@dataclass(frozen=True)
class TorsionEquivalence:
    forward: float
    backward: float
    null_dim: int
    t_rank: int


def torsion_equivalence_check(g, tau) -> TorsionEquivalence:
    """Both directions of: A = 0 iff T is built from its trace."""
    forward = _max(torsion_A_of(g, torsion_from_trace(tau)))
    basis = antisymmetric_basis()
    A_map = np.stack([np.asarray(torsion_A_of(g, t)).ravel() for t in basis], axis=1)
    kern, _ = null_space(A_map)
    backward = 0.0
    for k in kern.T:
        T = np.einsum("i,iabc->abc", k, basis)
        backward = max(backward, _max(trace_free_part(T)))
    t_map = np.stack([np.asarray(trace_free_part(t)).ravel() for t in basis], axis=1)
    _, t_rank = null_space(t_map)
    return TorsionEquivalence(forward, backward, kern.shape[1], t_rank)


# ---------------------------------------------------------- metric equation


def metric_solution(z):
    """f_{rs,m} = g_{sl}G^l_{mr} + g_{rl}G^l_{ms} + 2/3 g_{rs} T^l_{lm}."""
    return premetric_combination(z.g, z.Gamma)


def metric_equation_system(p: Point):
    """The connection-variation residual as an affine map of the 40 independent f_{rs,m}."""
    z = _j1(p).z
    dHG = np.asarray(primal(dH_dGamma(z)))
    dLg = np.asarray(primal(dL_dg(z)))

    def res(v):
        fg = reshape(v, (10, 4))
        full = fg[np.asarray([[PAIRS.index((min(r, s), max(r, s))) for s in range(4)] for r in range(4)])]
        return flatten(dHG + einsum("rsm,rs,abcmrs->abc", full, UPPER, dLg))

    return lstsq_affine(res, 40)


@dataclass(frozen=True)
class MetricSolution:
    f_g: np.ndarray
    residual: float
    lstsq_gap: float
    lstsq_residual: float


def solve_metric_equation(p: Point, tol=CONSISTENT) -> MetricSolution:
    """Closed-form solution, checked against the 64x40 least-squares solve."""
    z = _j1(p).z
    M, b = metric_equation_system(p)
    v, lres = solve_affine(M, b)
    if lres > tol:
        raise InconsistentSystemError("metric equations off the torsion surface", lres)
    f = np.asarray(primal(metric_solution(z)))
    coeffs = FieldCoefficients(f, np.zeros((4, 4, 4, 4)))
    _, _, res5 = field_eq_residuals(coeffs, z)
    gap = float(np.abs(v - f[PAIR_ROWS, PAIR_COLS].ravel()).max())
    return MetricSolution(f, _max(res5), gap, lres)


def metric_lstsq_residual(p: Point) -> float:
    M, b = metric_equation_system(p)
    return solve_affine(M, b)[1]


# ------------------------------------------------------ connection equation


def particular_connection(G):
    """f^a_{bc,m} = G^l_{mc} G^a_{bl}."""
    return einsum("lmc,abl->abcm", G, G)


def homogeneous_matrix(z):
    """10 x 256 matrix of h -> h^a_{bc,m} dL_a^{bc,m}/dg_{rs} (r <= s)."""
    dLg = np.asarray(primal(dL_dg(z)))
    return dLg[..., PAIR_ROWS, PAIR_COLS].reshape(256, 10).T


def trace_solution_basis():
    """h^a_{bc,m} = C_{bm} delta^a_c, 16 basis vectors as rows."""
    out = []
    for b in range(4):
        for m in range(4):
            h = np.zeros((4, 4, 4, 4))
            for a in range(4):
                h[a, b, a, m] = 1.0
            out.append(h.ravel())
    return np.array(out)


def torsion_conditions(K):
    """K^l_{lc,m} and K^l_{bc,l} + K^l_{cb,l} for K[a,b,c,m]."""
    return concat([flatten(einsum("llcm->cm", K)), flatten(einsum("lbcl->bc", K) + einsum("lcbl->bc", K))])


def torsion_solution_basis():
    M, _ = lstsq_affine(lambda v: torsion_conditions(reshape(v, (4, 4, 4, 4))), 256)
    kern, _ = null_space(M)
    return kern.T


@dataclass(frozen=True)
class ConnectionSolution:
    particular: np.ndarray
    residual: float
    kernel_dim: int
    trace_dim: int
    torsion_dim: int
    stacked_rank: int
    basis_residual: float


def solve_connection_equation(p: Point) -> ConnectionSolution:
    z = _j1(p).z
    P = np.asarray(primal(particular_connection(z.Gamma)))
    res4 = field_eq_residuals(FieldCoefficients(np.zeros((4, 4, 4)), P), z)[1]
    H = homogeneous_matrix(z)
    kern, _ = null_space(H)
    tr, ts = trace_solution_basis(), torsion_solution_basis()
    stacked = np.vstack([tr, ts])
    _, stacked_rank = null_space(stacked)
    scale = float(np.abs(H).max())
    basis_res = float(np.abs(H @ stacked.T).max()) / max(scale, 1.0)
    return ConnectionSolution(P, _max(res4), kern.shape[1], len(tr), len(ts), stacked_rank, basis_res)


# ------------------------------------------------------------ pre-metricity


def premetricity_relation(p: Point) -> float:
    """(nabla g)_{rs,m} - 2/3 g_{rs} T^l_{lm}."""
    from .lagrangian import covariant_metric_derivative

    z = _j1(p).z
    rel = covariant_metric_derivative(z) - (2.0 / 3.0) * einsum("rs,m->rsm", z.g, trace_torsion_of(z.Gamma))
    return _max(rel)


def covariant_metric_max(p: Point) -> float:
    from .lagrangian import covariant_metric_derivative

    return _max(covariant_metric_derivative(_j1(p).z))


# -------------------------------------------------- semiholonomic solutions


def premetric_velocity(z):
    """D_nu of the premetric combination, written with first-order coordinates; axes (r, s, m, nu)."""
    g, G, dg, dG = z.g, z.Gamma, z.dg, z.dGamma
    tau = trace_torsion_of(G)
    dtau = einsum("llmn->mn", torsion_velocity(z))
    half = einsum("sln,lmr->rsmn", dg, G) + einsum("sl,lmrn->rsmn", g, dG)
    return (
        half
        + einsum("rsmn->srmn", half)
        + (2.0 / 3.0) * (einsum("rsn,m->rsmn", dg, tau) + einsum("rs,mn->rsmn", g, dtau))
    )


def particular_connection_velocity(z):
    """G^l_{mc,n} G^a_{bl} + G^l_{mc} G^a_{bl,n}; axes (a, b, c, m, n)."""
    G, dG = z.Gamma, z.dGamma
    return einsum("lmcn,abl->abcmn", dG, G) + einsum("lmc,abln->abcmn", G, dG)


@dataclass(frozen=True)
class SolutionParams:
    """C[b, m, n] = C_{bmn} and K[a, b, c, m, n] = K^a_{bc,mn}."""

    C: np.ndarray
    K: np.ndarray

    @classmethod
    def zeros(cls):
        return cls(np.zeros((4, 4, 4)), np.zeros((4,) * 5))


def _antisym_bc(T):
    return T - einsum("abcm->acbm", T)


def r_relation(K_nu, P_nu):
    """Trace-free part of the (b, c)-antisymmetrized K + particular, for one nu."""
    return trace_free_part(_antisym_bc(K_nu + P_nu))


def _param_conditions_nu(K_nu, P_nu):
    return concat([torsion_conditions(K_nu), flatten(r_relation(K_nu, P_nu))])


def param_residuals(p: Point, params: SolutionParams) -> dict:
    """Residuals of the parameter conditions on the semiholonomic surface."""
    z = _j1(p).z
    P = np.asarray(primal(particular_connection_velocity(z)))
    K = params.K
    return {
        "trace": _max(einsum("llcmn->cmn", K)),
        "symmetric": _max(einsum("lbcln->bcn", K) + einsum("lcbln->bcn", K)),
        "r": max(_max(r_relation(K[..., n], P[..., n])) for n in range(4)),
    }


def displayed_k_relation(p: Point, params: SolutionParams) -> float:
    """The second-order K relation as displayed, antisymmetrizers without 1/2."""
    z = _j1(p).z
    G, dG, K = z.Gamma, z.dGamma, params.K

    def anti(X):  # X[a, b, c, m, n] -> X[a, b, c] - X[a, c, b]
        return X - einsum("abcmn->acbmn", X)

    trK = einsum("lclmn->cmn", K)
    lhs = anti(K)
    rhs = (
        -THIRD * anti(einsum("ab,cmn->abcmn", D, trK))
        - anti(einsum("lmcn,abl->abcmn", dG, G) + einsum("lmc,abln->abcmn", G, dG))
        + THIRD * anti(einsum("ab,lmcn,rrl->abcmn", D, dG, G) + einsum("ab,lmc,rrln->abcmn", D, G, dG))
        - THIRD * anti(einsum("ab,lmrn,rcl->abcmn", D, dG, G) + einsum("ab,lmr,rcln->abcmn", D, G, dG))
    )
    return _max(lhs - rhs)


def sample_params(p: Point, rng=None, restricted=False) -> SolutionParams:
    """Admissible parameters at a semiholonomic point.

    ``rng=None`` gives the minimal-norm admissible choice.  ``restricted`` adds
    the integrability conditions (F-blocks of the brackets vanish), which are
    solvable on the final surface.
    """
    if not restricted:
        return ParamSampler(p).draw(rng)
    z = _j1(p).z
    P = np.asarray(primal(particular_connection_velocity(z)))

    def conds(v):
        C = reshape(v[:64], (4, 4, 4))
        K = reshape(v[64:], (4,) * 5)
        parts = [_param_conditions_nu(K[..., n], P[..., n]) for n in range(4)]
        f = P + einsum("bmn,ac->abcmn", C, D) + K
        parts.append(flatten(f - einsum("abcmn->abcnm", f)))
        return concat(parts)

    M, b = lstsq_affine(conds, 64 + 1024)
    v, res = solve_affine(M, b, rng)
    if res > CONSISTENT:
        raise InconsistentSystemError("integrability restrictions on the parameters", res)
    return SolutionParams(v[:64].reshape(4, 4, 4), v[64:].reshape((4,) * 5))


class ParamSampler:
    """Admissible first-family parameters at one point; the linear systems are factored once."""

    def __init__(self, p: Point):
        z = _j1(p).z
        P = np.asarray(primal(particular_connection_velocity(z)))
        self.systems = []
        for n in range(4):
            M, b = lstsq_affine(lambda v, n=n: _param_conditions_nu(reshape(v, (4, 4, 4, 4)), P[..., n]), 256)
            sol = AffineSolutions(M, b)
            if sol.residual > CONSISTENT:
                raise InconsistentSystemError("semiholonomic parameter conditions", sol.residual)
            self.systems.append(sol)

    def draw(self, rng=None) -> SolutionParams:
        C = np.zeros((4, 4, 4)) if rng is None else rng.standard_normal((4, 4, 4))
        K = np.stack([sol.draw(rng).reshape(4, 4, 4, 4) for sol in self.systems], axis=-1)
        return SolutionParams(C, K)


def check_params(p: Point, params: SolutionParams, tol=1e-8):
    bad = {k: v for k, v in param_residuals(p, params).items() if v > tol}
    if bad:
        raise InvalidParamsError(f"parameters violate the solution conditions: {bad}")


def connection_velocity(z, params: SolutionParams):
    """f^a_{bc m,n} of the semiholonomic family."""
    return particular_connection_velocity(z) + einsum("bmn,ac->abcmn", params.C, D) + params.K


def _component_fn(nu, params: SolutionParams):
    e = np.zeros(4)
    e[nu] = 1.0

    def fn(z):
        fdg = premetric_velocity(z)
        fdG = connection_velocity(z, params)
        return concat(
            [
                e,
                z.dg[PAIR_ROWS, PAIR_COLS, nu],
                flatten(z.dGamma[..., nu]),
                flatten(fdg[PAIR_ROWS, PAIR_COLS][:, :, nu]),
                flatten(fdG[..., nu]),
            ]
        )

    return fn


def semiholonomic_solution(p: Point, params: SolutionParams, check=True):
    """The four factors X_0..X_3 on J1; ``params`` are validated at ``p``."""
    if check:
        check_params(p, params)
    return [VectorField(J1, _component_fn(nu, params), f"X_{nu}") for nu in range(4)]


def field_residual(p: Point) -> float:
    """Field equations of a semiholonomic field at p (only the point enters)."""
    z = _j1(p).z
    coeffs = FieldCoefficients(np.asarray(z.dg), np.asarray(z.dGamma))
    return max(_max(r) for r in field_eq_residuals(coeffs, z))


def family_slices(families):
    out, off = {}, 0
    for f in families:
        size = int(np.prod(np.shape(primal(FAMILIES[f](_ZERO_J1.z)))))
        out[f] = slice(off, off + size)
        off += size
    return out


_ZERO_J1 = Point(J1, np.concatenate([np.zeros(4), np.eye(4)[np.array(PAIRS).T[0], np.array(PAIRS).T[1]],
                                     np.zeros(J1.size - 14)]))


def lie_derivatives(p: Point, vectors, families=("c", "m", "t", "r")) -> dict:
    """Max |X(F)| per family for dense J1 vectors X (one Jacobian-vector pass)."""
    p1 = _j1(p)
    V = np.stack([np.asarray(v, dtype=float) for v in vectors], axis=1)
    _, der = jacobian(lambda w: constraint_vector(Coords(J1, w), families), p1.flat, V)
    der = np.asarray(primal(der))
    return {f: float(np.abs(der[s]).max()) for f, s in family_slices(families).items()}


def tangency(p: Point, fields, families=("c", "m", "t", "r")) -> dict:
    p1 = _j1(p)
    return lie_derivatives(p1, [X.at(p1) for X in fields], families)


def constraint_jacobian(p: Point, families=("c", "m", "t", "r", "i")):
    p1 = _j1(p)
    _, der = jacobian(lambda w: constraint_vector(Coords(J1, w), families), p1.flat)
    return np.asarray(primal(der))


def surface_tangent_space(p: Point, families=("c", "m", "t", "r", "i"), rtol=1e-9):
    """Orthonormal basis (columns) of the kernel of the constraint Jacobian."""
    return null_space(constraint_jacobian(p, families), rtol)


# -------------------------------------------------------------- brackets


BRACKET_BLOCKS = ("x", "g", "Gamma", "dg", "dGamma")


def integrability_residuals(fields, p: Point) -> dict:
    """Max |entry| per coordinate block over the six brackets [X_mu, X_nu]."""
    p1 = _j1(p)
    vals = [X.jacobian(p1) for X in fields]
    out = {b: 0.0 for b in BRACKET_BLOCKS}
    for m in range(4):
        for n in range(m + 1, 4):
            xv, jx = vals[m]
            yv, jy = vals[n]
            br = jy @ xv - jx @ yv
            for b in BRACKET_BLOCKS:
                out[b] = max(out[b], float(np.abs(br[J1.slices[b]]).max()))
    return out


def bracket_pair(X, Y, p: Point):
    return bracket(X, Y, _j1(p))


def displayed_c_restriction(p: Point, params: SolutionParams, sign=1.0) -> float:
    """C_{b[mn]} against sign * (G^l_{[m b,n]} G^s_{sl} + G^l_{[m b} G^s_{sl,n]})."""
    z = _j1(p).z
    G, dG, C = z.Gamma, z.dGamma, params.C
    t = einsum("lmbn,ssl->bmn", dG, G) + einsum("lmb,ssln->bmn", G, dG)
    rhs = t - einsum("bmn->bnm", t)
    return _max((C - einsum("bmn->bnm", C)) - sign * rhs)


# ---------------------------------------------------------- gauge fields


def gauge_field(C=None):
    """Trace gauge field: C_b delta^a_c on dGamma^a_{bc} plus D_m C_b delta^a_c on its velocities.

    ``C`` is a constant 4-vector or a callable x -> 4-vector (then D_m C = dC/dx^m).
    """
    if C is None:
        C = np.zeros(4)

    def fn(z):
        x = z.x
        if callable(C):
            val, dC = jacobian(lambda y: C(y), x)
        else:
            val, dC = np.asarray(C, dtype=float), np.zeros((4, 4))
        dgam = einsum("b,ac->abc", val, D)
        ddgam = einsum("bm,ac->abcm", dC, D)
        return concat(
            [np.zeros(4), np.zeros(10), flatten(dgam), np.zeros(40), flatten(ddgam)]
        )

    return VectorField(J1, fn, "gauge")


def torsion_candidate(rng):
    """Random K^a_{bc} antisymmetric in (b, c) with vanishing trace K^l_{lc}."""
    basis = antisymmetric_basis()
    T = np.einsum("i,iabc->abc", rng.standard_normal(len(basis)), basis)
    return np.asarray(trace_free_part(T))


def torsion_field(K):
    K = np.asarray(K, dtype=float)

    def fn(z):
        return np.concatenate([np.zeros(14), K.ravel(), np.zeros(296)])

    return VectorField(J1, fn, "torsion-candidate")


def random_tangent_tuples(basis, rng, count, k=4):
    for _ in range(count):
        yield [basis @ rng.standard_normal(basis.shape[1]) for _ in range(k)]


def gauge_checks(p: Point, C, rng, tuples=5, tangent=None) -> dict:
    """Residuals of a gauge field at a point of the final surface."""
    from .lagrangian import poincare_cartan

    p1 = _j1(p)
    X = gauge_field(C)
    xv = X.at(p1)
    if tangent is None:
        tangent, _ = surface_tangent_space(p1)
    form = poincare_cartan(p1).interior(xv)
    pullback = 0.0
    for vecs in random_tangent_tuples(tangent, rng, tuples):
        pullback = max(pullback, abs(form.evaluate(vecs)))
    tang = lie_derivatives(p1, [xv], ("c", "m", "t", "r", "i"))
    return {"pullback": pullback, **{f"tangency_{k}": v for k, v in tang.items()}}


def torsion_candidate_check(p: Point, K) -> tuple[float, float]:
    """(max |X(t)|, 2 max |K|) for the candidate field K^a_{bc} d/dGamma^a_{bc}."""
    p1 = _j1(p)
    val = lie_derivatives(p1, [torsion_field(K).at(p1)], ("t",))["t"]
    return val, 2.0 * float(np.abs(K).max())


# ----------------------------------------------------------- natural lifts


class PolynomialField:
    """Z = f^mu(x) d/dx^mu with polynomial components given as monomial lists.

    ``terms[mu]`` is a list of (coefficient, exponents) with four integer exponents.
    """

    def __init__(self, terms, name=""):
        self.terms = {}
        for mu, mono in dict(terms).items():
            if not 0 <= int(mu) < 4:
                raise ValueError(f"component index {mu} out of range")
            clean = []
            for coef, exps in mono:
                if len(exps) != 4 or any(e < 0 or float(e) != int(e) for e in exps):
                    raise ValueError("exponents must be four non-negative integers")
                clean.append((float(coef), tuple(int(e) for e in exps)))
            self.terms[int(mu)] = clean
        self.name = name

    @classmethod
    def from_callable(cls, fn):
        raise ValueError("natural lifts need polynomial components; give monomial terms")

    def derivatives(self, x, order=3):
        """[f, df, d2f, d3f] with axes (mu, a, b, c) evaluated at numeric x."""
        x = np.asarray(primal(x), dtype=float)
        out = [np.zeros((4,) + (4,) * k) for k in range(order + 1)]
        for mu, mono in self.terms.items():
            for coef, exps in mono:
                for k in range(order + 1):
                    for idx in np.ndindex(*(4,) * k):
                        e = list(exps)
                        c = coef
                        for i in idx:
                            c *= e[i]
                            e[i] -= 1
                        if c == 0.0 or min(e) < 0:
                            continue
                        out[k][(mu,) + idx] += c * np.prod(x ** np.array(e))
        return out


def natural_lift_components(Z: PolynomialField, z):
    """Displayed coefficient blocks of the lift: (f, Y_g, Y_dg, Y_Gamma, Y_dGamma), full tensors."""
    f, df, d2f, d3f = Z.derivatives(z.x)
    g, G, dg, dG = z.g, z.Gamma, z.dg, z.dGamma
    # df[l, a] = d f^l / dx^a
    Yg = -(einsum("la,lb->ab", df, g) + einsum("lb,la->ab", df, g))
    Ydg = -(
        einsum("nam,nb->abm", d2f, g)
        + einsum("nbm,an->abm", d2f, g)
        + einsum("na,nbm->abm", df, dg)
        + einsum("nb,anm->abm", df, dg)
        + einsum("nm,abn->abm", df, dg)
    )
    YG = (
        einsum("al,lbc->abc", df, G)
        - einsum("lb,alc->abc", df, G)
        - einsum("lc,abl->abc", df, G)
        - d2f
    )
    YdG = (
        einsum("al,lbcm->abcm", df, dG)
        - einsum("lb,alcm->abcm", df, dG)
        - einsum("lc,ablm->abcm", df, dG)
        - einsum("lm,abcl->abcm", df, dG)
        + einsum("alm,lbc->abcm", d2f, G)
        - einsum("lbm,alc->abcm", d2f, G)
        - einsum("lcm,abl->abcm", d2f, G)
        - d3f
    )
    return f, Yg, Ydg, YG, YdG


def natural_lift(Z: PolynomialField):
    def fn(z):
        f, Yg, Ydg, YG, YdG = natural_lift_components(Z, z)
        return concat(
            [f, Yg[PAIR_ROWS, PAIR_COLS], flatten(YG), flatten(Ydg[PAIR_ROWS, PAIR_COLS]), flatten(YdG)]
        )

    return VectorField(J1, fn, f"lift {Z.name}")


def prolongation_oracle(Z: PolynomialField, p: Point) -> np.ndarray:
    """Generic first jet prolongation of the lift to E: velocity part D_m Y^A - y^A_n D_m f^n."""
    p1 = _j1(p)

    def base_fn(w):
        return _lift_on_E(Z, Coords(E, w))

    z = p1.z
    base = p1.restrict(E)
    out = np.asarray(primal(natural_lift(Z).at(p1))).copy()
    f, df, _, _ = Z.derivatives(z.x)
    for m in range(4):
        direction = np.concatenate([np.eye(4)[m], np.asarray(z.dg)[PAIR_ROWS, PAIR_COLS, m],
                                    np.asarray(z.dGamma)[..., m].ravel()])
        _, dY = directional(base_fn, base.flat, direction)
        dY = np.asarray(primal(dY))
        Yg = dY[4:14]
        YG = dY[14:78]
        vel_g = np.einsum("rn,n->r", np.asarray(z.dg)[PAIR_ROWS, PAIR_COLS], df[:, m])
        vel_G = np.einsum("abcn,n->abc", np.asarray(z.dGamma), df[:, m]).ravel()
        out[J1.index_maps["dg"][PAIR_ROWS, PAIR_COLS, m]] = Yg - vel_g
        out[J1.index_maps["dGamma"][..., m].ravel()] = YG - vel_G
    return out


def _lift_on_E(Z: PolynomialField, zz):
    """The lift to E as a function of (x, g, Gamma), with exact polynomial x-dependence."""
    x = zz.x
    f = _poly_eval(Z, x, 0)
    df = _poly_eval(Z, x, 1)
    d2f = _poly_eval(Z, x, 2)
    g, G = zz.g, zz.Gamma
    Yg = -(einsum("la,lb->ab", df, g) + einsum("lb,la->ab", df, g))
    YG = einsum("al,lbc->abc", df, G) - einsum("lb,alc->abc", df, G) - einsum("lc,abl->abc", df, G) - d2f
    return concat([f, Yg[PAIR_ROWS, PAIR_COLS], flatten(YG)])


def _poly_eval(Z: PolynomialField, x, order):
    """k-th derivative tensor of the components as a differentiable function of x."""
    from .tensor import mul, stack

    entries = {}
    for mu, mono in Z.terms.items():
        for coef, exps in mono:
            for idx in np.ndindex(*(4,) * order):
                e = list(exps)
                c = coef
                for i in idx:
                    c *= e[i]
                    e[i] -= 1
                if c == 0.0 or min(e) < 0:
                    continue
                term = np.asarray(c)
                for i in range(4):
                    for _ in range(e[i]):
                        term = mul(term, x[i])
                key = (mu,) + idx
                entries[key] = term if key not in entries else entries[key] + term
    flat = [entries.get(key, np.asarray(0.0)) for key in np.ndindex(*(4,) * (order + 1))]
    return reshape(stack(flat), (4,) * (order + 1))


def displayed_tangency(Z: PolynomialField, p: Point) -> dict:
    """The five displayed combinations of constraint values along the lift."""
    z = _j1(p).z
    _, df, _, _ = Z.derivatives(z.x)
    vals = {k: np.asarray(primal(FAMILIES[k](z))) for k in ("c", "m", "t", "r", "i")}
    c_t = vals["c"] / np.where(np.eye(4, dtype=bool), 1.0, 2.0)
    out = {
        "c": -(np.einsum("mr,ns,rs->mn", df, D, c_t) + np.einsum("ns,mr,rs->mn", df, D, c_t)),
        "m": -(np.einsum("ar,asm->rsm", df, vals["m"])
               + np.einsum("bs,rbm->rsm", df, vals["m"])
               + np.einsum("nm,rsn->rsm", df, vals["m"])),
        "t": np.einsum("al,lbc->abc", df, vals["t"])
        - np.einsum("rb,arc->abc", df, vals["t"])
        - np.einsum("sc,abs->abc", df, vals["t"]),
        "r": np.einsum("al,lbcn->abcn", df, vals["r"])
        - np.einsum("rb,arcn->abcn", df, vals["r"])
        - np.einsum("sc,absn->abcn", df, vals["r"])
        - np.einsum("tn,abct->abcn", df, vals["r"]),
        "i": -(np.einsum("ar,asmn->rsmn", df, vals["i"])
               + np.einsum("bs,rbmn->rsmn", df, vals["i"])
               + np.einsum("lm,rsln->rsmn", df, vals["i"])
               + np.einsum("gn,rsmg->rsmn", df, vals["i"])),
    }
    out["c"] = out["c"] * np.where(np.eye(4, dtype=bool), 1.0, 2.0)
    return out


def natural_lift_checks(Z: PolynomialField, p: Point) -> dict:
    """Invariance of L_EP, tangency to the final surface, and the displayed identities."""
    p1 = _j1(p)
    X = natural_lift(Z)
    xv = X.at(p1)
    _, dLag = directional(lambda w: lagrangian_EP(Coords(J1, w)), p1.flat, xv)
    f, df, _, _ = Z.derivatives(p1.flat[:4])
    lag = float(primal(lagrangian_EP(p1.z)))
    tang = lie_derivatives(p1, [xv], ("c", "m", "t", "r", "i"))
    disp = displayed_tangency(Z, p1)
    _, der = jacobian(lambda w: constraint_vector(Coords(J1, w), ("c", "m", "t", "r", "i")), p1.flat,
                      xv.reshape(-1, 1))
    der = np.asarray(primal(der))[:, 0]
    sl = family_slices(("c", "m", "t", "r", "i"))
    ident = {k: float(np.abs(der[sl[k]] - disp[k].ravel()).max()) for k in sl}
    return {
        "lagrangian": abs(float(primal(dLag))),
        "density": abs(float(primal(dLag)) + lag * float(np.trace(df))),
        **{f"tangency_{k}": v for k, v in tang.items()},
        **{f"display_{k}": float(np.abs(disp[k]).max()) for k in disp},
        **{f"identity_{k}": v for k, v in ident.items()},
    }


def noether_current(Z: PolynomialField, p: Point):
    """The current i(j1 Y) Theta as a Form, and its displayed expansion."""
    from .forms import Form, d2x_terms, d3x_terms
    from .lagrangian import aux_H, aux_L, theta

    p1 = _j1(p)
    xv = natural_lift(Z).at(p1)
    th = theta(p1)
    lhs = th.interior(xv)
    z = p1.z
    f, _, _, YG, _ = natural_lift_components(Z, z)
    L = np.asarray(primal(aux_L(z)))
    H = float(primal(aux_H(z)))
    terms = []
    for m in range(4):
        sign, rest = d3x_terms(m)
        coef = float(np.einsum("abc,abc->", L[..., m], YG)) - H * f[m]
        terms.append((sign * coef, rest))
        for n in range(4):
            s2, rest2 = d2x_terms(m, n)
            if s2 == 0:
                continue
            for a, b, c in np.ndindex(4, 4, 4):
                v = f[m] * L[a, b, c, n]
                if v != 0.0:
                    terms.append((s2 * v, (f"Gamma_{a}_{b}_{c}",) + rest2))
    rhs = Form.from_terms(J1, 3, terms)
    return lhs, rhs


STANDARD_FIELDS = {
    "translation_t": {0: [(1.0, (0, 0, 0, 0))]},
    "translation_x": {1: [(1.0, (0, 0, 0, 0))]},
    "rotation_xy": {1: [(-1.0, (0, 0, 1, 0))], 2: [(1.0, (0, 1, 0, 0))]},
    "boost_like": {0: [(1.0, (0, 1, 0, 0))]},
    "quadratic": {0: [(0.5, (0, 2, 0, 0)), (1.0, (1, 0, 0, 1))], 2: [(-0.3, (1, 1, 0, 0))],
                  3: [(0.2, (0, 0, 3, 0))]},
}


def standard_fields():
    return {k: PolynomialField(v, k) for k, v in STANDARD_FIELDS.items()}
