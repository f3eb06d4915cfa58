"""Exact samplers for random jet points and for the constraint surfaces S_T, S_sh, S_f, P_f."""

from __future__ import annotations

import numpy as np

from .jets import J1, J1_STAR, J2, Coords, Point
from .lagrangian import (
    aux_L,
    constraint_vector,
    premetric_combination,
    torsion_constraint_t,
)
from .tensor import DELTA, DIM, ETA, concat, jacobian, primal

SURFACES = ("S_T", "S_sh", "S_f", "P_f")
SURFACE_ALIASES = {"st": "S_T", "ssh": "S_sh", "sf": "S_f", "pf": "P_f"}
# Families solved for dGamma on each surface (affine in dGamma once g, Gamma are fixed).
SOLVED_FAMILIES = {"S_sh": ("c", "r"), "S_f": ("c", "r", "i")}
CONSISTENCY_TOL = 1e-7


class SurfaceSamplingError(RuntimeError):
    """Least-squares particular solution of the surface equations left a residual."""

    def __init__(self, surface, residual, seed):
        super().__init__(f"{surface}: linear system inconsistent (residual {residual:.3e}, seed {seed})")
        self.surface = surface
        self.residual = residual
        self.seed = seed


def rng_for(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_lorentzian(rng: np.random.Generator) -> np.ndarray:
    """g = L^T eta L with |det L| > 0.1, so the signature is (-+++) by construction."""
    while True:
        lam = rng.uniform(-1.0, 1.0, (DIM, DIM))
        if abs(np.linalg.det(lam)) > 0.1:
            g = lam.T @ ETA @ lam
            return 0.5 * (g + g.T)


def sample_jet_point(seed) -> Point:
    """Random J2 point: Lorentzian g, every other coordinate uniform in [-1, 1]."""
    rng = rng_for(seed)
    g = random_lorentzian(rng)
    flat = rng.uniform(-1.0, 1.0, J2.size)
    flat[J2.index_maps["g"]] = g
    return Point(J2, flat)


def torsion_from_trace(tau) -> np.ndarray:
    """T^a_{bc} = 1/3 delta^a_b tau_c - 1/3 delta^a_c tau_b (so T^l_{lc} = tau_c)."""
    tau = np.asarray(tau, dtype=float)
    return (np.einsum("ab,c->abc", DELTA, tau) - np.einsum("ac,b->abc", DELTA, tau)) / 3.0


def connection_with_torsion(rng, tau) -> np.ndarray:
    """Random symmetric part plus half the prescribed torsion."""
    s = rng.uniform(-1.0, 1.0, (DIM, DIM, DIM))
    return 0.5 * (s + s.transpose(0, 2, 1)) + 0.5 * torsion_from_trace(tau)


def _solve_dgamma(p: Point, families, rng, surface, seed) -> Point:
    """Move dGamma onto {F = 0}: least-squares particular point plus a random kernel vector."""
    sl = J2.slices["dGamma"]
    base = p.flat.copy()

    # F is affine in dGamma, so one Jacobian gives the whole system.
    def F(v):
        return constraint_vector(Coords(J2, concat([base[: sl.start], v, base[sl.stop :]])), families)

    f0, A = jacobian(F, base[sl])
    f0, A = np.asarray(f0), np.asarray(A)
    u, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * s[0]))
    step = vt[:rank].T @ ((u[:, :rank].T @ f0) / s[:rank])
    dG = base[sl] - step
    kernel = vt[rank:].T
    dG = dG + kernel @ rng.standard_normal(kernel.shape[1])
    base[sl] = dG
    out = Point(J2, base)
    res = float(np.abs(primal(constraint_vector(out.z, families))).max())
    if res > CONSISTENCY_TOL:
        raise SurfaceSamplingError(surface, res, seed)
    return out


def sample_on_surface(surface: str, seed, trace=None) -> Point:
    """Point exactly on a constraint surface (J2 point, or a J1* momentum point for P_f).

    ``trace`` fixes the trace-torsion vector T^l_{l m}; default is uniform in [-1, 1].
    """
    surface = SURFACE_ALIASES.get(surface, surface)
    if surface not in SURFACES:
        raise KeyError(f"unknown surface {surface!r}; expected one of {SURFACES}")
    rng = rng_for(seed)
    g = random_lorentzian(rng)
    tau = rng.uniform(-1.0, 1.0, DIM) if trace is None else np.asarray(trace, dtype=float)
    G = connection_with_torsion(rng, tau)
    flat = rng.uniform(-1.0, 1.0, J2.size)
    flat[J2.index_maps["g"]] = g
    flat[J2.index_maps["Gamma"]] = G
    if surface in ("S_T", "P_f"):
        p = Point(J2, flat)
        if surface == "P_f":
            return legendre_point(p)
        return p
    flat[J2.index_maps["dg"]] = premetric_combination(g, G)
    p = Point(J2, flat)
    return _solve_dgamma(p, SOLVED_FAMILIES[surface], rng, surface, seed)


def legendre_point(p: Point) -> Point:
    """Image of a jet point under the Legendre map, as a J1* point."""
    z = p.z if p.layout is J1 or p.layout is J2 else None
    if z is None:
        raise ValueError("Legendre map needs a jet point")
    flat = np.zeros(J1_STAR.size)
    for b in ("x", "g", "Gamma"):
        flat[J1_STAR.slices[b]] = p.flat[p.layout.slices[b]]
    flat[J1_STAR.index_maps["p_conn"]] = primal(aux_L(z))
    return Point(J1_STAR, flat)


def surface_residuals(p: Point, families=("c", "m", "t", "r", "i")) -> dict:
    """Max |entry| of each constraint family at a jet point."""
    from .lagrangian import constraints

    z = Coords(J1, p.flat[: J1.size]) if p.layout is J2 else p.z
    return {f: float(np.abs(primal(constraints(z, f))).max()) for f in families}


def torsion_residual(p: Point) -> float:
    return float(np.abs(primal(torsion_constraint_t(p.z))).max())
