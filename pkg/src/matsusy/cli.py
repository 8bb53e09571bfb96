"""Command-line client.

Runs scenarios in-process, or against a running service with ``--server``.

    matsusy example-ps --output out/
    matsusy verify --model scenario.json --k 0.5
    matsusy all --model scenario.json --task verify,spectrum --format json
    matsusy serve --port 8000
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import TASK_ORDER, ScenarioConfig, builtin_example, load_config, parse_config
from .errors import ConfigError
from .runner import EXIT_CONFIG, EXIT_NUMERICAL, RunReport, emit, run

PRIMARY_TOL = {
    "verify": "identity",
    "spectrum": "spectrum_rel",
    "groundstate": "zero_mode",
    "ladder": "ladder",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--model", metavar="FILE", help="scenario config (JSON)")
    p.add_argument("--k", type=float)
    p.add_argument("--domain", nargs=3, metavar=("A", "B", "N"))
    p.add_argument("--levels", type=int)
    p.add_argument("--tol", action="append", default=[], metavar="T|NAME=T",
                   help="override the command's main tolerance, or a named one; repeatable")
    p.add_argument("--output", metavar="DIR")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--server", metavar="URL", help="post the scenario to a running service")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matsusy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TASK_ORDER:
        _common(sub.add_parser(name, help=f"run the {name} task"))
    p = sub.add_parser("all", help="run several tasks (default: all)")
    _common(p)
    p.add_argument("--task", help="comma separated subset of " + ",".join(TASK_ORDER))
    p = sub.add_parser("example-ps", help="builtin two-channel rational example")
    _common(p)
    p.add_argument("--mu-ex", type=float, default=1.0)
    p.add_argument("--phi-ex", type=float, default=0.5)
    p.add_argument("--task", help="comma separated subset of " + ",".join(TASK_ORDER))
    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _apply_overrides(cfg: ScenarioConfig, args, tasks: list[str]) -> ScenarioConfig:
    upd = {"tasks": tasks}
    if args.k is not None:
        upd["k"] = args.k
    if args.levels is not None:
        upd["levels"] = args.levels
    data = cfg.model_dump(by_alias=True)
    data.update(upd)
    if args.domain is not None:
        a, b, n = args.domain
        data["domain"] = {"a": float(a), "b": float(b), "npoints": int(n)}
    for item in args.tol:
        if "=" in item:
            key, val = item.split("=", 1)
        else:
            if len(tasks) != 1:
                raise ConfigError("a bare --tol needs a single-task command; use NAME=T")
            key, val = PRIMARY_TOL[tasks[0]], item
        if key not in data["tolerances"]:
            raise ConfigError(f"unknown tolerance {key!r}")
        data["tolerances"][key] = float(val)
    return parse_config(data)


def _tasks(args) -> list[str]:
    if args.command in TASK_ORDER:
        return [args.command]
    if getattr(args, "task", None):
        tasks = [t.strip() for t in args.task.split(",") if t.strip()]
        bad = [t for t in tasks if t not in TASK_ORDER]
        if bad or not tasks:
            raise ConfigError(f"unknown tasks: {bad}")
        return tasks
    return list(TASK_ORDER)


def _remote(server: str, cfg: ScenarioConfig) -> RunReport:
    import httpx

    resp = httpx.post(server.rstrip("/") + "/run", content=cfg.model_dump_json(by_alias=True),
                      headers={"content-type": "application/json"}, timeout=None)
    if resp.status_code == 422:
        raise ConfigError(resp.text)
    resp.raise_for_status()
    return RunReport.model_validate(resp.json())


def _print_summary(report: RunReport, out=None):
    out = out or sys.stdout
    print(f"scenario {report.scenario}", file=out)
    for name, task in report.tasks.items():
        print(f"  {name}: {task.status}" + (f" ({task.error})" if task.error else ""), file=out)
        for cname, c in task.checks.items():
            mark = "pass" if c.passed else "FAIL"
            print(f"    [{mark}] {cname} = {c.value:.3e} (tol {c.tol:.1e})", file=out)
    for note in report.notes:
        print(f"  note: {note}", file=out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("matsusy.service:app", host=args.host, port=args.port)
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "example-ps":
            base = builtin_example(args.mu_ex, args.phi_ex, args.k if args.k is not None else 0.3)
        elif args.model:
            base = load_config(args.model)
        else:
            raise ConfigError("--model FILE is required")
        cfg = _apply_overrides(base, args, _tasks(args))
        report = _remote(args.server, cfg) if args.server else run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # transport failures in client mode
        if args.server:
            print(f"server error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        raise
    _print_summary(report)
    if args.output:
        emit(report, args.format, args.output)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
