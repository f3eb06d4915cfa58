"""Run check suites, aggregate per-point residuals into reports, write JSON or markdown."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from . import checks as registry

WORKERS_ENV = "PALATINI_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 42
    points_per_check: int = 100
    atol: float = 1e-9
    rtol: float = 1e-9
    suites: tuple = registry.SUITES
    record_timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "suites", tuple(self.suites))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if isinstance(self.points_per_check, bool) or not isinstance(self.points_per_check, int):
            raise ConfigError(f"points_per_check must be an integer, got {self.points_per_check!r}")
        if self.points_per_check < 1:
            raise ConfigError("points_per_check must be at least 1")
        for name in ("atol", "rtol"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        if not self.suites:
            raise ConfigError("no suites selected")
        unknown = [s for s in self.suites if s not in registry.SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s) {unknown}; expected some of {list(registry.SUITES)}")

    @classmethod
    def from_dict(cls, obj) -> "VerifyConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a flat JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, path) -> "VerifyConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["suites"] = list(self.suites)
        return out


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    paper_anchor: str
    n_points: int
    max_residual: float
    threshold: float
    status: str
    seed: int
    wall_time_ms: int
    kind: str = "max"
    note: str = ""

    @classmethod
    def from_dict(cls, obj) -> "CheckReport":
        return cls(**obj)


def n_points(check: registry.Check, cfg: VerifyConfig) -> int:
    if check.suite == "dims":
        return 1
    return max(1, round(check.points * cfg.points_per_check / 100))


def threshold_for(check: registry.Check, cfg: VerifyConfig) -> float:
    if check.kind == "witness":
        return 1.0
    if check.threshold is not None:
        return float(check.threshold)
    return float(cfg.rtol if check.relative else cfg.atol)


def aggregate(check: registry.Check, values) -> float:
    """Order-independent reduction of per-point values to one residual."""
    if check.kind == "fraction":
        return math.fsum(values) / len(values)
    if check.kind == "witness":
        return max(check.threshold / v if v > 0 else math.inf for v in values)
    return max(values)


def run_check(check_id: str, cfg: VerifyConfig) -> CheckReport:
    check = registry.BY_ID[check_id]
    n = n_points(check, cfg)
    start = time.perf_counter()
    note = ""
    try:
        values = [float(check.fn(registry.Ctx(cfg.seed, i, check_id))) for i in range(n)]
        if any(math.isnan(v) for v in values):
            raise FloatingPointError("residual is NaN")
        residual = aggregate(check, values)
    except Exception as exc:  # a crashing check is a failing check, never a skipped one
        residual, note = math.inf, f"{type(exc).__name__}: {exc}"
    wall = int(round((time.perf_counter() - start) * 1000)) if cfg.record_timing else 0
    thr = threshold_for(check, cfg)
    return CheckReport(
        check_id=check_id,
        paper_anchor=check.anchor,
        n_points=n,
        max_residual=residual,
        threshold=thr,
        status="pass" if residual <= thr else "fail",
        seed=cfg.seed,
        wall_time_ms=wall,
        kind=check.kind,
        note=note,
    )


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def run_suite(cfg: VerifyConfig, progress=None) -> list[CheckReport]:
    """Every registered check of the selected suites, in registry order."""
    ids = [c.check_id for c in registry.checks_for(cfg.suites)]
    workers = worker_count()
    registry.clear_caches()
    if workers == 1:
        reports = []
        for cid in ids:
            reports.append(run_check(cid, cfg))
            if progress:
                progress(reports[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_check, cid, cfg) for cid in ids]
            reports = [f.result() for f in futures]
        if progress:
            for r in reports:
                progress(r)
    registry.clear_caches()
    return reports


def summary(reports) -> dict:
    passed = sum(r.status == "pass" for r in reports)
    return {"pass": passed, "fail": len(reports) - passed}


def to_json(reports, cfg: VerifyConfig | None = None) -> str:
    doc = {
        "config": (cfg or VerifyConfig()).to_dict(),
        "reports": [asdict(r) for r in reports],
        "summary": summary(reports),
    }
    return json.dumps(doc, indent=2)


def to_markdown(reports, cfg: VerifyConfig | None = None) -> str:
    cfg = cfg or VerifyConfig()
    s = summary(reports)
    lines = [
        f"# Verification report (seed {cfg.seed}, {cfg.points_per_check} points per check)",
        "",
        f"{s['pass']} passed, {s['fail']} failed.",
        "",
        "| check_id | paper_anchor | kind | n_points | max_residual | threshold | status | wall_time_ms |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for r in reports:
        lines.append(
            f"| {r.check_id} | {r.paper_anchor} | {r.kind} | {r.n_points} | {r.max_residual:.3e} "
            f"| {r.threshold:.1e} | {r.status} | {r.wall_time_ms} |"
        )
    notes = [r for r in reports if r.note]
    if notes:
        lines += ["", "## Errors", ""] + [f"- {r.check_id}: {r.note}" for r in notes]
    return "\n".join(lines) + "\n"


def emit_report(reports, fmt: str, path, cfg: VerifyConfig | None = None):
    if fmt not in ("json", "md", "markdown"):
        raise ValueError(f"unknown report format {fmt!r}")
    text = to_json(reports, cfg) if fmt == "json" else to_markdown(reports, cfg)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def load_report(path):
    """(config dict, list of CheckReport, summary) from a JSON report."""
    with open(path) as fh:
        doc = json.load(fh)
    return doc["config"], [CheckReport.from_dict(r) for r in doc["reports"]], doc["summary"]
