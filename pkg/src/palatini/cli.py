"""Command line: verify suites, sample constraint surfaces, build solutions at a point, dims."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import verify
from .jets import J1, J1_STAR, J2, P_NONMOMENTA, SIGMA_J1, dims, dump_points, load_point

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="palatini", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run check suites and report")
    v.add_argument("--config", help="flat JSON object with VerifyConfig fields")
    v.add_argument("--seed", type=int)
    v.add_argument("--points", type=int, help="points per check (scales every check's count)")
    v.add_argument("--tol", type=float, help="sets both atol and rtol")
    v.add_argument("--suite", action="append", dest="suites", help="repeatable; default all suites")
    v.add_argument("--report", help="write the report to this path")
    v.add_argument("--format", choices=("json", "md"), default="json")
    v.add_argument("--no-timing", action="store_true", help="report wall_time_ms as 0 (byte-stable reports)")
    v.add_argument("--quiet", action="store_true")

    s = sub.add_parser("sample", help="exact samples on a constraint surface")
    s.add_argument("--surface", required=True, choices=("st", "ssh", "sf", "pf"))
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    so = sub.add_parser("solve", help="solution multivector at a surface point")
    so.add_argument("--point", required=True, help="S_sh/S_f jet point or P_f momentum point (JSON)")
    so.add_argument("--params", help="JSON with C and K; default is the minimal-norm admissible choice")

    c = sub.add_parser("constraints", help="constraint family values at a point")
    c.add_argument("--point", required=True)
    c.add_argument("--family", action="append", choices=("A", "t", "c", "m", "r", "i"))

    r = sub.add_parser("reconstruct", help="connection over a metric 1-jet")
    r.add_argument("--point", required=True, help="Sigma_J1 point (x, g, dg) as JSON")
    r.add_argument("--gauge", type=float, nargs=4, default=(0.0, 0.0, 0.0, 0.0), metavar="C")

    sub.add_parser("dims", help="coordinate counts")
    return p


def _config(args) -> verify.VerifyConfig:
    base = verify.VerifyConfig.from_json(args.config).to_dict() if args.config else {}
    if args.seed is not None:
        base["seed"] = args.seed
    if args.points is not None:
        base["points_per_check"] = args.points
    if args.tol is not None:
        base["atol"] = base["rtol"] = args.tol
    if args.suites:
        base["suites"] = args.suites
    if args.no_timing:
        base["record_timing"] = False
    return verify.VerifyConfig.from_dict(base)


def cmd_verify(args) -> int:
    cfg = _config(args)

    def show(r):
        if not args.quiet:
            print(f"{r.status.upper():4s} {r.check_id:34s} {r.max_residual:10.3e} <= {r.threshold:.1e}"
                  f"  n={r.n_points} {r.wall_time_ms} ms", flush=True)

    reports = verify.run_suite(cfg, progress=show)
    if args.report:
        try:
            verify.emit_report(reports, args.format, args.report, cfg)
        except OSError as exc:
            raise UsageError(f"cannot write report: {exc}") from exc
    s = verify.summary(reports)
    print(f"{s['pass']} passed, {s['fail']} failed")
    return EXIT_OK if s["fail"] == 0 else EXIT_FAIL


def cmd_sample(args) -> int:
    from .surfaces import sample_on_surface

    if args.count < 1:
        raise UsageError("--count must be at least 1")
    points = [sample_on_surface(args.surface, [args.seed, i]) for i in range(args.count)]
    dump_points(points, args.out)
    print(f"wrote {len(points)} {args.surface} points to {args.out}")
    return EXIT_OK


def _load(path):
    try:
        return load_point(path)
    except (OSError, ValueError, KeyError, StopIteration, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read point {path}: {exc}") from exc


def _read_params(path):
    if path is None:
        return None
    try:
        with open(path) as fh:
            obj = json.load(fh)
        return np.asarray(obj["C"], dtype=float), np.asarray(obj["K"], dtype=float)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read params {path}: {exc}") from exc


def cmd_solve(args) -> int:
    from . import hamiltonian as ham, solutions as sol

    point = _load(args.point)
    raw = _read_params(args.params)
    try:
        if point.layout in (J1_STAR, P_NONMOMENTA):
            q = point.restrict(P_NONMOMENTA)
            params = ham.sample_ham_params(q) if raw is None else ham.HamParams(raw[0].reshape(4, 4),
                                                                              raw[1].reshape((4,) * 4))
            fields = ham.ham_solution(q, params)
            r4, r5 = ham.ham_residuals_nonmomenta(ham.ham_field_coefficients(q, params), q)
            out = {
                "chart": "P",
                "field_residual": max(float(np.abs(r4).max()), float(np.abs(r5).max())),
                "tangency_t": ham.ham_tangency(q, fields),
                "vectors": [X.at(q).tolist() for X in fields],
            }
        elif point.layout in (J1, J2):
            params = sol.sample_params(point) if raw is None else sol.SolutionParams(
                raw[0].reshape(4, 4, 4), raw[1].reshape((4,) * 5))
            fields = sol.semiholonomic_solution(point, params)
            p1 = point.restrict(J1)
            out = {
                "chart": "J1",
                "field_residual": sol.field_residual(point),
                "tangency": sol.tangency(point, fields),
                "vectors": [X.at(p1).tolist() for X in fields],
            }
        else:
            raise UsageError(f"no solution family on a {point.layout.name} point")
    except (sol.InvalidParamsError, sol.InconsistentSystemError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(json.dumps(out))
    return EXIT_OK


def cmd_constraints(args) -> int:
    from .surfaces import surface_residuals

    point = _load(args.point)
    if point.layout not in (J1, J2):
        raise UsageError("constraint families live on jet points")
    print(json.dumps(surface_residuals(point, tuple(args.family or ("A", "t", "c", "m", "r", "i")))))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from .bridge import reconstruct_from_sigma

    point = _load(args.point)
    if point.layout is not SIGMA_J1:
        raise UsageError("reconstruction needs a Sigma_J1 point (x, g, dg)")
    print(json.dumps(reconstruct_from_sigma(point, args.gauge).to_json()))
    return EXIT_OK


def cmd_dims(args) -> int:
    print(json.dumps(dims()))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "sample": cmd_sample, "solve": cmd_solve, "constraints": cmd_constraints,
            "reconstruct": cmd_reconstruct, "dims": cmd_dims}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, verify.ConfigError) as exc:
        print(f"palatini: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
