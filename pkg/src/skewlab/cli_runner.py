"""Command-line experiment runner.

    skewlab run --config cfg.json [--seed N] [--out DIR] [--threads N]
    skewlab list
    skewlab validate --config cfg.json

Outputs land in <out>/<scenario>/: one CSV per result table (provenance
header with config hash, master seed, artifact version) plus summary.json
with the gate results.  Exit status: 0 all gates pass, 2 some gate failed,
1 error.  SKEWLAB_OUT sets the default output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .kernels import backend_name
from .reporting import ScenarioResult, config_hash, write_summary, write_table
from .scenarios import REGISTRY, list_scenarios

ENV_OUT = "SKEWLAB_OUT"


def run(config: ExperimentConfig) -> ScenarioResult:
    """Execute a validated configuration and return its result object."""
    sdef = REGISTRY[config.scenario]
    started = time.perf_counter()
    result = sdef.fn(config.params, config.master_seed, config.threads)
    result.runtime_seconds = time.perf_counter() - started
    return result


def write_outputs(config: ExperimentConfig, result: ScenarioResult, out_dir: str) -> str:
    run_dir = os.path.join(out_dir, config.scenario)
    payload = config.hash_payload()
    meta = {
        "scenario": config.scenario,
        "config_hash": config_hash(payload),
        "master_seed": config.master_seed,
        "artifact_version": __version__,
    }
    for name, (columns, rows) in result.tables.items():
        write_table(os.path.join(run_dir, f"{name}.csv"), columns, rows, meta)
    summary = {
        **meta,
        "backend": backend_name(),
        "gates": result.gates,
        "passed": result.passed,
        "details": result.details,
        "runtime_seconds": result.runtime_seconds,
        "params": config.params,
    }
    write_summary(os.path.join(run_dir, "summary.json"), summary)
    return run_dir


def _resolve_out(cli_out: str | None, config: ExperimentConfig) -> str:
    return cli_out or config.out_dir or os.environ.get(ENV_OUT) or "out"


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    if args.threads is not None:
        config = dataclasses.replace(config, threads=args.threads)
    try:
        result = run(config)
    except Exception as exc:
        print(f"error: scenario {config.scenario!r} failed: {exc}", file=sys.stderr)
        return 1
    run_dir = write_outputs(config, result, _resolve_out(args.out, config))
    for gate, ok in result.gates.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {config.scenario}:{gate}")
    print(f"wrote {run_dir} ({result.runtime_seconds:.1f}s)")
    return 0 if result.passed else 2


def _cmd_list(_args) -> int:
    for name, description in list_scenarios():
        print(f"{name:28s} {description}")
    return 0


def _cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: scenario={config.scenario} seed={config.master_seed}")
    print(json.dumps(config.params, indent=2, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the config JSON")
    p_run.add_argument("--seed", type=int, default=None, help="override master_seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=None, help="worker processes")
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list", help="list available scenarios")
    p_list.set_defaults(fn=_cmd_list)

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
