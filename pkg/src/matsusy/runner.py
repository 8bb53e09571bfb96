"""Scenario runner: executes the requested tasks and collects a report."""
from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from . import core, invariance, spectral
from .config import TASK_ORDER, ScenarioConfig
from .errors import ConfigError, EmptyLadderError, MatsusyError

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "matsusy.report/1"

SIGN_NOTES = [
    "shape-invariance constant is measured pointwise and equals (2k+1)*nu - 2*mu",
    "energies are eigenvalues of a_k^+ a_k + shift and are bounded below by the shift; "
    "the ladder adds C_k + ... + C_{k+n-1}, so E^n = E^0 + (2kn + n^2)*nu - 2n*mu",
    "for the example-ps builtin (mu = -mu_ex) the ladder is E^n = +(2n+1)*mu_ex",
]

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class Check(BaseModel):
    value: float
    tol: float
    passed: bool


class Table(BaseModel):
    header: list[str]
    rows: list[list[float]]


class TaskResult(BaseModel):
    status: Literal["ok", "tolerance_failure", "error"]
    checks: dict[str, Check] = Field(default_factory=dict)
    data: dict[str, Any] = Field(default_factory=dict)
    tables: dict[str, Table] = Field(default_factory=dict)
    error: Optional[str] = None


class RunReport(BaseModel):
    schema_tag: str = REPORT_SCHEMA
    scenario: str = ""
    tasks: dict[str, TaskResult] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        statuses = [t.status for t in self.tasks.values()]
        if "error" in statuses:
            return EXIT_NUMERICAL
        if "tolerance_failure" in statuses:
            return EXIT_TOLERANCE
        return EXIT_OK


def _check(value: float, tol: float, passed: bool | None = None) -> Check:
    value = float(value)
    if passed is None:
        passed = bool(np.isfinite(value) and value <= tol)
    return Check(value=value if math.isfinite(value) else 1e308, tol=float(tol), passed=passed)


def _finish(checks: dict[str, Check], **kw) -> TaskResult:
    ok = all(c.passed for c in checks.values())
    return TaskResult(status="ok" if ok else "tolerance_failure", checks=checks, **kw)


# ---------------------------------------------------------------------------
# tasks


def task_verify(cfg: ScenarioConfig, model: core.Model) -> TaskResult:
    tol = cfg.tolerances
    d = cfg.domain
    h = tol.fd_step
    lo, hi = core.validity_window(model, 0.5 * (d.a + d.b))
    a, b = max(d.a, lo), min(d.b, hi)
    margin = max(1e-6, 0.05 * (b - a))
    x = invariance.residual_grid(model, d.a, d.b, 41, h, pole_margin=margin)
    rq1, rp1 = invariance.residual_determining(model, x, h)
    rq2, rp2 = invariance.residual_determining(model, x, h / 2)
    checks = {}
    for name, r1, r2 in (("q_fd_order", rq1, rq2), ("p_fd_order", rp1, rp2)):
        floor = 1e-11
        if r2.max_abs <= floor:
            checks[name] = _check(4.0, tol.fd_order_high, True)
        else:
            ratio = r1.max_abs / r2.max_abs
            checks[name] = _check(ratio, tol.fd_order_high, tol.fd_order_low <= ratio <= tol.fd_order_high)
    # identities are checked on the part of the domain inside the validity window
    a = a + margin if a > d.a else a
    b = b - margin if b < d.b else b
    dom = spectral.GridDomain(a, b, d.npoints)
    ck = invariance.extract_Ck(model, cfg.k, dom.x, tol.identity)
    pred = invariance.predicted_Ck(model, cfg.k)
    checks["ck_vs_prediction"] = _check(abs(ck - pred), tol.identity)
    checks["partner_identity"] = _check(spectral.partner_identity(model, cfg.k, dom, tol.identity), tol.partner)
    data = {
        "window": [a, b],
        "C_k": ck,
        "C_k_predicted": pred,
        "q_residual": [rq1.as_dict(), rq2.as_dict()],
        "p_residual": [rp1.as_dict(), rp2.as_dict()],
    }
    return _finish(checks, data=data)


def _domain(cfg: ScenarioConfig) -> spectral.GridDomain:
    return spectral.GridDomain(cfg.domain.a, cfg.domain.b, cfg.domain.npoints)


def _ladder_levels(model, cfg):
    return [spectral.energy_ladder(model, cfg.k, cfg.shift, j) for j in range(cfg.levels)]


def task_spectrum(cfg: ScenarioConfig, model: core.Model) -> TaskResult:
    dom = _domain(cfg)
    H = spectral.discretize(model, cfg.k, cfg.shift, dom)
    count = min(model.n * cfg.levels, H.size)
    eig = spectral.low_spectrum(H, count)
    levels = np.array(_ladder_levels(model, cfg))
    rows, worst = [], 0.0
    for i, e in enumerate(eig):
        pred = levels[np.argmin(np.abs(levels - e))]
        gap = abs(e - pred)
        worst = max(worst, gap / max(abs(pred), 1.0))  # absolute below unit scale
        rows.append([i, float(e), float(pred), gap])
    ratio = spectral.convergence_ratio(model, cfg.k, cfg.shift, dom)
    checks = {"max_relative_gap": _check(worst, cfg.tolerances.spectrum_rel)}
    report = spectral.SpectralReport(list(eig), list(levels), math.nan, ratio)
    return _finish(
        checks,
        data={"eigenvalues": report.eigenvalues, "ladder_predictions": report.ladder_predictions,
              "convergence_ratio": ratio},
        tables={"spectrum": Table(header=["n", "eigenvalue", "ladder_prediction", "abs_gap"], rows=rows)},
    )


def _psi_table(psi: spectral.GridSpinor) -> Table:
    n = psi.n
    header = ["x"] + [f"{p}_psi_{c + 1}" for c in range(n) for p in ("re", "im")]
    cols = [psi.domain.x]
    for c in range(n):
        cols += [psi.values[:, c].real, psi.values[:, c].imag]
    return Table(header=header, rows=np.column_stack(cols).tolist())


def task_groundstate(cfg: ScenarioConfig, model: core.Model) -> TaskResult:
    tol = cfg.tolerances
    dom = _domain(cfg)
    modes = spectral.zero_mode_basis(model, cfg.k, dom)
    H = spectral.discretize(model, cfg.k, cfg.shift, dom)
    e_low = float(spectral.low_spectrum(H, 1)[0])
    checks, tables, rq = {}, {}, []
    for j, m in enumerate(modes):
        checks[f"residual_{j}"] = _check(spectral.zero_mode_residual(model, cfg.k, m), tol.zero_mode)
        q = spectral.rayleigh_quotient(H, m)
        rq.append(q)
        checks[f"rayleigh_{j}"] = _check(abs(q - e_low), tol.rayleigh)
        tables[f"groundstate_{j}"] = _psi_table(m)
    data = {"dimension": len(modes), "lowest_eigenvalue": e_low, "rayleigh_quotients": rq}
    return _finish(checks, data=data, tables=tables)


def task_ladder(cfg: ScenarioConfig, model: core.Model) -> TaskResult:
    tol = cfg.tolerances
    dom = _domain(cfg)
    H = spectral.discretize(model, cfg.k, cfg.shift, dom)
    ground = spectral.zero_mode_basis(model, cfg.k, dom)
    checks, rows, data = {}, [], {}
    for level in range(1, cfg.levels):
        try:
            states = spectral.excited_state(model, cfg.k, level, dom)
        except EmptyLadderError as exc:
            data["terminated_at"] = level
            data["termination"] = str(exc)
            break
        pred = spectral.energy_ladder(model, cfg.k, cfg.shift, level)
        for s, psi in enumerate(states):
            q = spectral.rayleigh_quotient(H, psi)
            overlap = max((abs(spectral.inner(g, psi)) for g in ground), default=0.0)
            checks[f"level{level}_state{s}_energy"] = _check(abs(q - pred), tol.ladder)
            checks[f"level{level}_state{s}_orthogonality"] = _check(overlap, tol.orthogonality)
            rows.append([level, s, q, pred, abs(q - pred), overlap])
    return _finish(checks, data=data, tables={"ladder": Table(
        header=["level", "state", "rayleigh", "ladder_prediction", "abs_gap", "max_overlap"], rows=rows)})


TASKS = {
    "verify": task_verify,
    "spectrum": task_spectrum,
    "groundstate": task_groundstate,
    "ladder": task_ladder,
}


def run(cfg: ScenarioConfig) -> RunReport:
    """Execute the tasks of ``cfg`` in canonical order; failures are recorded
    per task and do not stop later tasks."""
    try:
        model = cfg.to_model()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = RunReport(scenario=cfg.name, notes=list(SIGN_NOTES))
    for name in TASK_ORDER:
        if name not in cfg.tasks:
            continue
        logger.info("running task %s", name)
        try:
            report.tasks[name] = TASKS[name](cfg, model)
        except (MatsusyError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.warning("task %s failed: %s", name, exc)
            report.tasks[name] = TaskResult(status="error", error=f"{type(exc).__name__}: {exc}")
    return report


def emit(report: RunReport, fmt: str, path: str | Path) -> list[Path]:
    """Write ``summary.json`` (and one CSV per table for ``fmt='csv'``) into ``path``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    summary = report.model_dump(mode="json")
    if fmt == "csv":
        for tname, task in report.tasks.items():
            for name, table in task.tables.items():
                p = out / f"{name}.csv"
                with p.open("w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(table.header)
                    w.writerows(table.rows)
                written.append(p)
        for task in summary["tasks"].values():
            task["tables"] = {k: f"{k}.csv" for k in task["tables"]}
    p = out / "summary.json"
    p.write_text(json.dumps(summary, indent=2))
    written.append(p)
    return written
