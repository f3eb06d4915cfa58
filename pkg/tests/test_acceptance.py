"""Full default verification run, summarized as one pass/fail line per acceptance item.

Each item names the checks that decide it and the tolerance it states. An item passes when
every named check passes and no check threshold is looser than the stated tolerance.
Run directly (python tests/test_acceptance.py) or under pytest; the lines print either way.
"""

import sys
import time

import pytest

from palatini import checks, verify

# (number, title, [(check_id, stated tolerance)]); witness checks state the lower bound on the witness
ITEMS = [
    (1, "dimension counts", [("dims.E", 0), ("dims.J1", 0), ("dims.Sigma_J1", 0)]),
    (2, "beth contraction and torsion identities", [("lag.beth_identity", 1e-10), ("lag.beth_torsion", 1e-10)]),
    (3, "torsion constraint equivalence", [("lag.torsion_equivalence", 1e-12), ("lag.torsion_null_dim", 0)]),
    (4, "metric equation solvability", [("lag.metric_uniqueness", 1e-8), ("lag.metric_solution", 1e-9),
                                        ("lag.metric_incompatibility", 0.05)]),
    (5, "connection equation kernel", [("lag.connection_kernel", 0), ("lag.homogeneous_basis", 1e-9),
                                       ("lag.connection_particular", 1e-9)]),
    (6, "semiholonomic solution family", [("lag.semiholonomic_field", 1e-9), ("lag.semiholonomic_tangency", 1e-8),
                                          ("lag.semiholonomic_params", 1e-8)]),
    (7, "pre-metricity biconditional", [("lag.premetricity", 1e-9), ("lag.premetricity_zero_trace", 1e-9),
                                        ("lag.premetricity_unit_trace", 1e-3)]),
    (8, "Legendre rank and projectability", [("ham.legendre_rank", 0), ("ham.legendre_kernel", 1e-9),
                                             ("ham.form_projectability", 1e-9), ("ham.torsion_projectable", 1e-12),
                                             ("ham.others_not_projectable", 1e-3)]),
    (9, "pure connection chart", [("ham.pure_volume", 1e-10), ("ham.pure_round_trip", 1e-10),
                                  ("ham.pure_hamiltonian", 1e-11), ("ham.pure_solutions", 1e-9), ("ham.zeta", 1e-9)]),
    (10, "gauge fields in both formalisms", [("lag.gauge", 1e-8), ("lag.torsion_candidate", 1e-10),
                                             ("ham.gauge", 1e-8), ("ham.torsion_candidate", 1e-10)]),
    (11, "bridge to the metric formalism", [("bridge.reconstruction", 1e-9), ("bridge.xi_kernel_rank", 0),
                                            ("bridge.form_equivalence", 1e-8),
                                            ("bridge.xi_gauge_invariance", 1e-12)]),
    (12, "integrability witness", [("bridge.integrability_witness", 1e-7), ("bridge.witness_center", 1e-7)]),
    (13, "natural lift Noether suite", [("lag.lift_invariance", 1e-8), ("lag.lift_tangency", 1e-8)]),
]
DETERMINISM = 14
CFG = verify.VerifyConfig(record_timing=False)


def judge(item, by_id):
    """(ok, detail) for one item from a list of reports."""
    _, _, parts = item
    bad = []
    for cid, stated in parts:
        r, check = by_id[cid], checks.BY_ID[cid]
        if r.status != "pass":
            bad.append(f"{cid} failed ({r.max_residual:.2e} vs {r.threshold:.1e})")
        elif check.kind == "witness" and check.threshold < stated:
            bad.append(f"{cid} witness bound {check.threshold:.0e} below {stated:.0e}")
        elif check.kind != "witness" and r.threshold > stated:
            bad.append(f"{cid} threshold {r.threshold:.0e} looser than {stated:.0e}")
    worst = max((by_id[cid] for cid, _ in parts), key=lambda r: r.max_residual / max(r.threshold, 1e-300))
    return not bad, "; ".join(bad) or f"worst {worst.check_id} {worst.max_residual:.2e} <= {worst.threshold:.1e}"


def line(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}"


_RUN = {}


def full_run():
    if "reports" not in _RUN:
        start = time.perf_counter()
        _RUN["reports"] = verify.run_suite(CFG)
        _RUN["seconds"] = time.perf_counter() - start
        _RUN["json"] = verify.to_json(_RUN["reports"], CFG)
    return _RUN


def determinism():
    first = full_run()["json"]
    second = verify.to_json(verify.run_suite(CFG), CFG)
    return first == second, f"two full runs, {len(first)} report bytes, {'identical' if first == second else 'differ'}"


def test_every_check_is_assigned():
    named = {cid for _, _, parts in ITEMS for cid, _ in parts}
    assert named <= set(checks.BY_ID)


@pytest.mark.parametrize("item", ITEMS, ids=lambda it: f"{it[0]:02d}-{it[1].replace(' ', '-')}")
def test_item(item, capsys):
    run = full_run()
    ok, detail = judge(item, {r.check_id: r for r in run["reports"]})
    with capsys.disabled():
        print("\n" + line(item[0], item[1], ok, detail))
    assert ok, detail


def test_determinism(capsys):
    ok, detail = determinism()
    with capsys.disabled():
        print("\n" + line(DETERMINISM, "bit-identical reports", ok, detail))
        print(f"full suite wall time {full_run()['seconds']:.1f} s")
    assert ok


def test_all_checks_pass():
    s = verify.summary(full_run()["reports"])
    assert s["fail"] == 0, s


def main():
    run = full_run()
    by_id = {r.check_id: r for r in run["reports"]}
    results = [judge(item, by_id) for item in ITEMS]
    for item, (ok, detail) in zip(ITEMS, results):
        print(line(item[0], item[1], ok, detail))
    ok14, detail14 = determinism()
    print(line(DETERMINISM, "bit-identical reports", ok14, detail14))
    print(f"full suite wall time {run['seconds']:.1f} s")
    return 0 if all(ok for ok, _ in results) and ok14 else 1


if __name__ == "__main__":
    sys.exit(main())
