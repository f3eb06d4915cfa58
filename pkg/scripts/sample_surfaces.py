"""Write exact samples of every constraint surface and print their constraint residuals."""

import argparse
from pathlib import Path

from palatini.hamiltonian import hamiltonian_constraints, legendre
from palatini.jets import dump_points
from palatini.surfaces import SURFACE_ALIASES, sample_on_surface, surface_residuals


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="samples")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for alias, name in SURFACE_ALIASES.items():
        points = [sample_on_surface(name, [args.seed, i]) for i in range(args.count)]
        dump_points(points, out / f"{alias}.json")
        if name == "P_f":
            worst = {"momenta": max(hamiltonian_constraints(p) for p in points)}
        else:
            worst = {}
            for p in points:
                for k, v in surface_residuals(p).items():
                    worst[k] = max(worst.get(k, 0.0), v)
        cells = "  ".join(f"{k}={v:.1e}" for k, v in worst.items())
        print(f"{name:5s} {args.count} points -> {out / (alias + '.json')}  max residuals {cells}")


if __name__ == "__main__":
    main()
