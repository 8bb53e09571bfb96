import csv
import json

import httpx
import numpy as np
import pytest
from fastapi.testclient import TestClient

from matsusy import cli, core
from matsusy.config import (ModelSpec, ScenarioConfig, builtin_example, dump_config, load_config,
                            parse_config)
from matsusy.core import Model, NuClass, QEntry, QVariant
from matsusy.errors import ConfigError
from matsusy.runner import REPORT_SCHEMA, RunReport, emit, run
from matsusy.service import app

import modelgen


def smooth_config(**overrides) -> ScenarioConfig:
    m = Model(NuClass.negative(1.0), (QEntry(QVariant.TANH, 0.0), QEntry(QVariant.TANH, 0.3)), 0.0,
              [[0.2, 0.3 + 0.1j], [0.3 - 0.1j, -0.1]])
    data = dict(name="tanh-pair", model=ModelSpec.from_model(m).model_dump(by_alias=True), k=-3.0,
                shift=0.0, domain={"a": -10.0, "b": 10.0, "npoints": 401}, levels=3)
    data.update(overrides)
    return parse_config(data)


def pole_config(**overrides) -> ScenarioConfig:
    m = Model(NuClass.positive(1.0), (QEntry(QVariant.TAN_POLE, 0.0), QEntry(QVariant.TAN_POLE, 0.4)),
              0.5, np.diag([0.1, 0.2]))
    data = dict(name="tan-pair", model=ModelSpec.from_model(m).model_dump(by_alias=True), k=1.0,
                domain={"a": -1.0, "b": 2.0, "npoints": 200}, tasks=["verify", "spectrum"])
    data.update(overrides)
    return parse_config(data)


@pytest.fixture
def config_file(tmp_path):
    def write(cfg: ScenarioConfig):
        p = tmp_path / f"{cfg.name}.json"
        p.write_text(dump_config(cfg))
        return str(p)
    return write


# ---------------------------------------------------------------------------
# configuration


def test_config_round_trip_preserves_model():
    rng = np.random.default_rng(8)
    for variant, splits in modelgen.SPLITS.items():
        s = modelgen.random_model(rng, variant, splits[-1])
        cfg = parse_config(dict(model=ModelSpec.from_model(s.model).model_dump(by_alias=True), k=s.k,
                                domain={"a": s.a, "b": s.b, "npoints": 32}))
        again = parse_config(dump_config(cfg))
        assert again == cfg
        x = np.linspace(s.a, s.b, 7)
        np.testing.assert_array_equal(core.eval_W(again.to_model(), s.k, x), core.eval_W(s.model, s.k, x))


@pytest.mark.parametrize("patch, message", [
    ({"schema_version": "2"}, "schema_version"),
    ({"tasks": []}, "tasks"),
    ({"tasks": ["plot"]}, "tasks"),
    ({"domain": {"a": 1.0, "b": 0.0, "npoints": 50}}, "a < b"),
    ({"model": {"nu": {"variant": "zero"}, "entries": [{"variant": "zero"}, {"variant": "zero"}],
                "mu": 1.0, "phi_upper": [[0, 0], [0, 0], [0, 0]]}}, "proportional"),
    ({"model": {"nu": {"variant": "zero"}, "entries": [{"variant": "inv_pole", "gamma": 0.0}, {"variant": "zero"}],
                "mu": 1.0, "phi_upper": [[0, 1], [0, 0], [0, 0]]}}, "must be real"),
    ({"model": {"nu": {"variant": "zero"}, "entries": [{"variant": "inv_pole", "gamma": 0.0}, {"variant": "zero"}],
                "mu": 1.0, "phi_upper": [[0, 0]]}}, "phi_upper"),
])
def test_invalid_configs_raise_config_error(patch, message):
    data = json.loads(dump_config(smooth_config()))
    data.update(patch)
    with pytest.raises(ConfigError, match=message):
        parse_config(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_builtin_example():
    cfg = builtin_example(2.0, 0.5, 0.3)
    P = core.p_matrix(cfg.to_model(), 1.0)
    np.testing.assert_allclose(P, [[0.5, -0.5], [-0.5, 2.0]], atol=1e-15)
    assert cfg.shift == 2.0 and cfg.model.mu == -2.0
    assert cfg.domain.b == pytest.approx(12 / np.sqrt(2.0))
    for bad in ({"mu_ex": 0.0}, {"mu_ex": -1.0}, {"k": 0.0}, {"phi_ex": float("nan")}):
        kw = {"mu_ex": 1.0, "phi_ex": 0.5, "k": 0.3} | bad
        with pytest.raises(ConfigError):
            builtin_example(**kw)


# ---------------------------------------------------------------------------
# runner


def test_verify_only_on_random_models():
    rng = np.random.default_rng(21)
    for variant in modelgen.SPLITS:
        s = modelgen.random_model(rng, variant, modelgen.SPLITS[variant][0])
        cfg = parse_config(dict(model=ModelSpec.from_model(s.model).model_dump(by_alias=True), k=s.k,
                                domain={"a": s.a, "b": s.b, "npoints": 200}, tasks=["verify"]))
        report = run(cfg)
        task = report.tasks["verify"]
        assert task.status == "ok", task.checks
        assert task.checks["ck_vs_prediction"].value < 1e-9
        assert list(report.tasks) == ["verify"]


def test_smooth_scenario_passes_everything():
    report = run(smooth_config())
    assert list(report.tasks) == ["verify", "spectrum", "groundstate", "ladder"]
    assert report.exit_code == 0, {n: t.checks for n, t in report.tasks.items()}
    np.testing.assert_allclose(report.tasks["spectrum"].data["eigenvalues"], [0, 0, 5, 5, 8, 8], atol=5e-3)
    assert report.schema_tag == REPORT_SCHEMA
    assert any("(2k+1)*nu - 2*mu" in n for n in report.notes)


def test_run_is_deterministic():
    cfg = smooth_config(tasks=["verify", "spectrum"])
    assert run(cfg).model_dump() == run(cfg).model_dump()


def test_pole_crossing_is_recorded_per_task():
    report = run(pole_config())
    assert set(report.tasks) == {"verify", "spectrum"}
    assert report.tasks["verify"].status == "ok"
    spec = report.tasks["spectrum"]
    assert spec.status == "error" and "DomainError" in spec.error
    assert report.exit_code == 3


def test_emit_tables_and_summary(tmp_path):
    report = run(smooth_config(tasks=["spectrum", "groundstate"]))
    written = emit(report, "csv", tmp_path)
    names = {p.name for p in written}
    assert {"spectrum.csv", "groundstate_0.csv", "groundstate_1.csv", "summary.json"} <= names
    with open(tmp_path / "spectrum.csv") as fh:
        assert next(csv.reader(fh)) == ["n", "eigenvalue", "ladder_prediction", "abs_gap"]
    with open(tmp_path / "groundstate_0.csv") as fh:
        assert next(csv.reader(fh)) == ["x", "re_psi_1", "im_psi_1", "re_psi_2", "im_psi_2"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["schema_tag"] == REPORT_SCHEMA
    assert summary["tasks"]["spectrum"]["tables"] == {"spectrum": "spectrum.csv"}
    json_only = emit(report, "json", tmp_path / "j")
    assert [p.name for p in json_only] == ["summary.json"]
    with pytest.raises(ValueError):
        emit(report, "xml", tmp_path)


def test_empty_report(tmp_path):
    report = RunReport()
    emit(report, "json", tmp_path)
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data["tasks"] == {}
    assert report.exit_code == 0


# ---------------------------------------------------------------------------
# command line


def test_cli_exit_codes(config_file, tmp_path, capsys):
    ok = config_file(smooth_config())
    assert cli.main(["verify", "--model", ok]) == 0
    assert cli.main(["spectrum", "--model", ok, "--tol", "1e-12"]) == 1
    assert cli.main(["all", "--model", ok, "--task", "verify,spectrum", "--tol", "spectrum_rel=1e-12"]) == 1
    assert cli.main(["verify", "--model", str(tmp_path / "nope.json")]) == 2
    assert cli.main(["all", "--model", ok, "--tol", "1e-3"]) == 2
    assert cli.main(["all", "--model", ok, "--task", "plot"]) == 2
    assert cli.main(["verify", "--model", ok, "--tol", "bogus=1"]) == 2
    assert cli.main(["verify"]) == 2
    assert cli.main(["all", "--model", config_file(pole_config())]) == 3
    out = capsys.readouterr().out
    assert "[pass] ck_vs_prediction" in out


def test_cli_overrides_and_output(config_file, tmp_path):
    path = config_file(smooth_config())
    out = tmp_path / "out"
    code = cli.main(["groundstate", "--model", path, "--k", "-2.5", "--domain", "-9", "9", "301",
                     "--output", str(out), "--format", "json"])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    rows = summary["tasks"]["groundstate"]["tables"]["groundstate_0"]["rows"]
    assert len(rows) == 301 and rows[0][0] == -9.0


def test_cli_example_ps_verify(tmp_path):
    assert cli.main(["example-ps", "--task", "verify", "--output", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["tasks"]["verify"]["data"]["C_k"] == pytest.approx(2.0, abs=1e-9)
    assert cli.main(["example-ps", "--mu-ex", "-1"]) == 2


# ---------------------------------------------------------------------------
# service


@pytest.fixture
def client():
    return TestClient(app)


def test_service_endpoints(client):
    assert client.get("/health").json()["status"] == "ok"
    ex = client.get("/examples/ps", params={"mu_ex": 2.0}).json()
    assert ex["shift"] == 2.0 and ex["model"]["mu"] == -2.0
    assert client.get("/examples/ps", params={"mu_ex": -2.0}).status_code == 422
    body = json.loads(dump_config(smooth_config()))
    r = client.post("/tasks/verify", json=body)
    assert r.status_code == 200
    report = RunReport.model_validate(r.json())
    assert list(report.tasks) == ["verify"] and report.exit_code == 0
    assert client.post("/tasks/plot", json=body).status_code == 404
    body["model"]["phi_upper"] = [[0, 0]]
    assert client.post("/run", json=body).status_code == 422


def test_service_example_run(client):
    r = client.post("/examples/ps/run", params={"mu_ex": 1.0})
    report = RunReport.model_validate(r.json())
    assert report.tasks["verify"].status == "ok"
    assert set(report.tasks) == {"verify", "spectrum", "groundstate", "ladder"}


def test_cli_thin_client_mode(client, config_file, monkeypatch, capsys):
    def post(url, content, headers, timeout):
        assert url == "http://svc/run"
        return client.post("/run", content=content, headers=headers)

    monkeypatch.setattr(httpx, "post", post)
    path = config_file(smooth_config())
    assert cli.main(["verify", "--model", path, "--server", "http://svc/"]) == 0
    assert "verify: ok" in capsys.readouterr().out

    def down(*args, **kw):
        raise httpx.ConnectError("refused")

    monkeypatch.setattr(httpx, "post", down)
    assert cli.main(["verify", "--model", path, "--server", "http://svc"]) == 3
