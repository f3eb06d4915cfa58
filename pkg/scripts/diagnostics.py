"""Numbers behind the convention choices: how the alternatives fail.

Each row compares the convention used by the package with an alternative reading at the same
sample point. Only the used column is expected to be small.
"""

import argparse

import numpy as np

from palatini import bridge
from palatini import hamiltonian as ham
from palatini import solutions as sol
from palatini.jets import P_NONMOMENTA
from palatini.surfaces import sample_on_surface


def rows(seed):
    rng = np.random.default_rng(seed)
    sf = sample_on_surface("S_f", seed)
    params = sol.sample_params(sf, rng, restricted=True)
    yield ("c-restriction sign", "-1", sol.displayed_c_restriction(sf, params, sign=-1.0),
           "+1", sol.displayed_c_restriction(sf, params, sign=1.0))

    q = sample_on_surface("P_f", seed).restrict(P_NONMOMENTA)
    hp = ham.sample_ham_params(q, rng, restricted=True)
    used = max(bridge.comparison_table_check(q, hp, 1.0).values())
    half = max(bridge.comparison_table_check(q, hp, 0.5).values())
    yield "Levi-Civita quadratic coefficient", "1", used, "1/2", half

    on = bridge.form_equivalence_check(q, rng, tuples=5).deviation
    yield "form equivalence vectors", "P_f tangent", on, "generic", bridge.form_equivalence_offsurface(q, rng)

    p = sample_on_surface("S_sh", seed)
    fields = sol.semiholonomic_solution(p, sol.sample_params(p))
    tang = sol.tangency(p, fields, ("c", "m", "t", "r", "i"))
    yield "semiholonomic tangency on S_sh", "c,m,t,r", max(tang[k] for k in "cmtr"), "i", tang["i"]

    blocks = sol.integrability_residuals(fields, p)
    final = sol.semiholonomic_solution(sf, params)
    yield "bracket dg block", "S_f restricted", sol.integrability_residuals(final, sf)["dg"], "S_sh minimal", blocks["dg"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'quantity':36s} {'used':>16s} {'value':>9s}   {'alternative':>16s} {'value':>9s}")
    for name, a, va, b, vb in rows(args.seed):
        print(f"{name:36s} {a:>16s} {va:9.2e}   {b:>16s} {vb:9.2e}")


if __name__ == "__main__":
    main()
