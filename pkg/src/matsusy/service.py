"""HTTP front end for the scenario runner."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query

from . import __version__
from .config import ScenarioConfig, builtin_example
from .errors import ConfigError
from .runner import RunReport, run

app = FastAPI(title="matsusy", version=__version__)


def _run(cfg: ScenarioConfig) -> RunReport:
    try:
        return run(cfg)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/run", response_model=RunReport)
def run_scenario(cfg: ScenarioConfig):
    return _run(cfg)


@app.post("/tasks/{task}", response_model=RunReport)
def run_task(task: str, cfg: ScenarioConfig):
    if task not in ("verify", "spectrum", "groundstate", "ladder"):
        raise HTTPException(status_code=404, detail=f"unknown task {task!r}")
    return _run(cfg.model_copy(update={"tasks": [task]}))


def _example(mu_ex: float, phi_ex: float, k: float) -> ScenarioConfig:
    try:
        return builtin_example(mu_ex, phi_ex, k)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/examples/ps", response_model=ScenarioConfig)
def example_ps(mu_ex: float = Query(1.0), phi_ex: float = Query(0.5), k: float = Query(0.3)):
    return _example(mu_ex, phi_ex, k)


@app.post("/examples/ps/run", response_model=RunReport)
def example_ps_run(mu_ex: float = Query(1.0), phi_ex: float = Query(0.5), k: float = Query(0.3)):
    return _run(_example(mu_ex, phi_ex, k))
