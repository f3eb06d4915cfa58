import json

import numpy as np
import pytest

from palatini import checks, cli, verify
from palatini.verify import ConfigError, VerifyConfig

FAST = {"suites": ["dims", "oracles"], "points_per_check": 2, "record_timing": False}


@pytest.fixture(scope="module")
def fast_reports():
    cfg = VerifyConfig.from_dict(FAST)
    return cfg, verify.run_suite(cfg)


# ------------------------------------------------------------------ config


@pytest.mark.parametrize("bad", [
    {"points_per_check": 0},
    {"points_per_check": 1.5},
    {"seed": -1},
    {"seed": True},
    {"atol": 0.0},
    {"rtol": float("nan")},
    {"suites": ["nope"]},
    {"suites": []},
    {"colour": "red"},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        VerifyConfig.from_dict(bad)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        VerifyConfig.from_json(bad)
    with pytest.raises(ConfigError):
        VerifyConfig.from_json(tmp_path / "missing.json")
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        VerifyConfig.from_json(arr)


def test_config_round_trip(tmp_path):
    cfg = VerifyConfig(seed=7, suites=("bridge",))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert VerifyConfig.from_json(path) == cfg


# ---------------------------------------------------------------- registry


def test_registry_is_consistent():
    ids = [c.check_id for c in checks.CHECKS]
    assert len(ids) == len(set(ids))
    assert {c.anchor for c in checks.CHECKS} == set(checks.ANCHORS)
    assert {c.suite for c in checks.CHECKS} == set(checks.SUITES)
    with pytest.raises(KeyError):
        checks.checks_for(["nope"])


def test_point_scaling():
    cfg = VerifyConfig(points_per_check=50)
    by = checks.BY_ID
    assert verify.n_points(by["oracle.contract_loop"], cfg) == 50
    assert verify.n_points(by["oracle.gradient_fd"], cfg) == 5
    assert verify.n_points(by["dims.E"], cfg) == 1
    assert verify.n_points(by["oracle.gradient_fd"], VerifyConfig(points_per_check=1)) == 1


def test_thresholds():
    cfg = VerifyConfig(atol=1e-7, rtol=1e-5)
    by = checks.BY_ID
    assert verify.threshold_for(by["lag.x_equation"], cfg) == 1e-7
    assert verify.threshold_for(by["bridge.lagrangian_bar"], cfg) == 1e-5
    assert verify.threshold_for(by["oracle.contract_loop"], cfg) == 1e-12
    assert verify.threshold_for(by["lag.premetricity_unit_trace"], cfg) == 1.0


def test_aggregation():
    by = checks.BY_ID
    assert verify.aggregate(by["lag.metric_incompatibility"], [0.0, 1.0, 0.0, 0.0]) == 0.25
    assert verify.aggregate(by["lag.premetricity_unit_trace"], [1.0, 1e-2]) == pytest.approx(0.1)
    assert verify.aggregate(by["lag.premetricity_unit_trace"], [0.0]) == float("inf")
    assert verify.aggregate(by["lag.x_equation"], [1.0, 3.0, 2.0]) == 3.0


def test_crashing_check_fails(monkeypatch):
    check = checks.BY_ID["oracle.contract_loop"]

    def boom(ctx):
        raise RuntimeError("kaput")

    monkeypatch.setitem(checks.BY_ID, "oracle.contract_loop", check.__class__(
        check.check_id, check.anchor, check.suite, check.points, boom, threshold=check.threshold))
    r = verify.run_check("oracle.contract_loop", VerifyConfig(points_per_check=1))
    assert r.status == "fail" and r.max_residual == float("inf") and "kaput" in r.note


# ----------------------------------------------------------------- reports


def test_dims_suite():
    reports = verify.run_suite(VerifyConfig(suites=("dims",)))
    assert [r.check_id for r in reports] == ["dims.E", "dims.J1", "dims.Sigma_J1"]
    assert all(r.status == "pass" and r.max_residual == 0 for r in reports)


def test_empty_summary():
    assert verify.summary([]) == {"pass": 0, "fail": 0}


def test_fast_suites_pass(fast_reports):
    _, reports = fast_reports
    assert verify.summary(reports)["fail"] == 0
    assert all(r.wall_time_ms == 0 and r.seed == 42 for r in reports)


def test_json_round_trip(tmp_path, fast_reports):
    cfg, reports = fast_reports
    path = tmp_path / "r.json"
    verify.emit_report(reports, "json", path, cfg)
    conf, back, summ = verify.load_report(path)
    assert back == reports and conf == cfg.to_dict() and summ == verify.summary(reports)
    assert path.read_text() == verify.to_json(back, cfg)


def test_markdown_rows(fast_reports):
    cfg, reports = fast_reports
    text = verify.to_markdown(reports, cfg)
    rows = [line for line in text.splitlines() if line.startswith("| ") and not line.startswith("| check_id")]
    assert len(rows) == len(reports)


def test_unwritable_report(fast_reports):
    cfg, reports = fast_reports
    with pytest.raises(OSError):
        verify.emit_report(reports, "json", "/nonexistent/dir/r.json", cfg)
    with pytest.raises(ValueError):
        verify.emit_report(reports, "xml", "r.xml", cfg)


def test_parallel_matches_inline(monkeypatch, fast_reports):
    cfg, reports = fast_reports
    monkeypatch.setenv(verify.WORKERS_ENV, "2")
    assert verify.run_suite(cfg) == reports


def test_bad_worker_count(monkeypatch):
    monkeypatch.setenv(verify.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        verify.worker_count()
    monkeypatch.setenv(verify.WORKERS_ENV, "0")
    with pytest.raises(ConfigError):
        verify.worker_count()


# --------------------------------------------------------------------- CLI


def test_cli_dims(capsys):
    assert cli.main(["dims"]) == 0
    assert json.loads(capsys.readouterr().out)["J1"] == 374


@pytest.mark.parametrize("argv", [
    ["verify", "--points", "0"],
    ["verify", "--suite", "nope"],
    ["verify", "--tol", "-1"],
    ["bogus"],
    ["sample", "--surface", "sf", "--out", "x.json", "--count", "0"],
    ["solve", "--point", "/nonexistent.json"],
])
def test_cli_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_cli_verify_report(tmp_path, capsys):
    path = tmp_path / "r.md"
    code = cli.main(["verify", "--suite", "dims", "--report", str(path), "--format", "md", "--quiet"])
    assert code == 0 and path.read_text().count("| dims.") == 3
    assert "3 passed, 0 failed" in capsys.readouterr().out


def test_cli_verify_unwritable_report(capsys):
    assert cli.main(["verify", "--suite", "dims", "--report", "/nonexistent/r.json", "--quiet"]) == 2


def test_cli_verify_failure_exit(monkeypatch, capsys):
    monkeypatch.setattr(verify, "threshold_for", lambda check, cfg: -1.0)
    assert cli.main(["verify", "--suite", "dims", "--quiet"]) == 1


def test_cli_sample_solve_constraints(tmp_path, capsys):
    sf, pf = tmp_path / "sf.json", tmp_path / "pf.json"
    assert cli.main(["sample", "--surface", "sf", "--count", "1", "--seed", "3", "--out", str(sf)]) == 0
    assert cli.main(["sample", "--surface", "pf", "--count", "1", "--seed", "3", "--out", str(pf)]) == 0
    capsys.readouterr()
    assert cli.main(["constraints", "--point", str(sf)]) == 0
    assert max(json.loads(capsys.readouterr().out).values()) < 1e-9
    assert cli.main(["solve", "--point", str(sf)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["chart"] == "J1" and out["field_residual"] < 1e-9 and len(out["vectors"]) == 4
    assert cli.main(["solve", "--point", str(pf)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["chart"] == "P" and out["field_residual"] < 1e-9 and out["tangency_t"] < 1e-8


def test_cli_solve_rejects_bad_params(tmp_path, capsys):
    sf, params = tmp_path / "sf.json", tmp_path / "p.json"
    cli.main(["sample", "--surface", "sf", "--out", str(sf)])
    params.write_text(json.dumps({"C": [0.0] * 64, "K": [1.0] * 1024}))
    assert cli.main(["solve", "--point", str(sf), "--params", str(params)]) == 2


def test_cli_reconstruct(tmp_path, capsys):
    from palatini.bridge import xi_map
    from palatini.jets import P_NONMOMENTA, dump_points
    from palatini.surfaces import sample_on_surface

    q = sample_on_surface("P_f", 4).restrict(P_NONMOMENTA)
    path = tmp_path / "s.json"
    dump_points([xi_map(q)], path)
    C = [repr(float(v)) for v in np.einsum("ala->l", q.Gamma)]
    assert cli.main(["reconstruct", "--point", str(path), "--gauge", *C]) == 0
    out = json.loads(capsys.readouterr().out)
    assert np.abs(np.asarray(out["Gamma"]) - q.Gamma.ravel()).max() < 1e-10
    sf = tmp_path / "sf.json"
    cli.main(["sample", "--surface", "sf", "--out", str(sf)])
    assert cli.main(["reconstruct", "--point", str(sf)]) == 2
