"""Experiment configuration: JSON in, validated parameters out.

A config names a scenario and overrides its default parameters.  Validation
failures raise ConfigError carrying the offending field path, so a bad file
is rejected before any computation starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"config field '{path}': {message}")
        self.path = path


@dataclass(frozen=True)
class Field:
    """One scenario parameter: a default plus a checker."""

    default: object
    check: callable  # value -> error message or None
    doc: str = ""


def positive_int(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        return "expected a positive integer"
    return None


def nonneg_number(v):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
        return "expected a non-negative number"
    return None


def positive_number(v):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
        return "expected a positive number"
    return None


def horizon_list(v):
    if not isinstance(v, list) or not v:
        return "expected a non-empty list of increasing positive integers"
    prev = 0
    for item in v:
        if not isinstance(item, int) or isinstance(item, bool) or item < 1:
            return "expected a non-empty list of increasing positive integers"
        if item <= prev:
            return "horizons must be strictly increasing"
        prev = item
    return None


def number_pair(v):
    if (
        not isinstance(v, list)
        or len(v) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
        or not v[0] < v[1]
    ):
        return "expected a pair [low, high] with low < high"
    return None


def mesh_list(v):
    if not isinstance(v, list) or not v:
        return "expected a non-empty list of times in (0, 1]"
    for item in v:
        if not isinstance(item, (int, float)) or not 0.0 < item <= 1.0:
            return "mesh times must lie in (0, 1]"
    return None


def system_json(v):
    from .skew_product import SkewSystem

    if not isinstance(v, dict):
        return "expected a skew-system JSON object"
    try:
        SkewSystem.from_json(v)
    except Exception as exc:  # constructor errors double as schema errors
        return f"invalid skew system: {exc}"
    return None


def any_string(v):
    return None if isinstance(v, str) else "expected a string"


@dataclass
class ExperimentConfig:
    scenario: str
    master_seed: int
    out_dir: str | None
    threads: int
    params: dict = field(default_factory=dict)

    def hash_payload(self) -> dict:
        """The part of the config that determines results (not placement)."""
        return {
            "scenario": self.scenario,
            "master_seed": self.master_seed,
            "params": self.params,
        }


def validate_config(data: dict) -> ExperimentConfig:
    from .scenarios import REGISTRY

    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    scenario = data.get("scenario")
    if not isinstance(scenario, str):
        raise ConfigError("scenario", "missing or not a string")
    if scenario not in REGISTRY:
        known = ", ".join(REGISTRY)
        raise ConfigError("scenario", f"unknown scenario {scenario!r}; known: {known}")
    seed = data.get("master_seed", 20260809)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("master_seed", "expected a non-negative integer")
    out_dir = data.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out_dir", "expected a string")
    threads = data.get("threads", 1)
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ConfigError("threads", "expected a positive integer")

    schema = REGISTRY[scenario].params
    known_top = {"scenario", "master_seed", "out_dir", "threads"}
    params = {}
    for key, value in data.items():
        if key in known_top:
            continue
        if key not in schema:
            raise ConfigError(key, f"unknown parameter for scenario {scenario!r}")
        message = schema[key].check(value)
        if message:
            raise ConfigError(key, message)
        params[key] = value
    for key, spec in schema.items():
        params.setdefault(key, spec.default)
    return ExperimentConfig(
        scenario=scenario,
        master_seed=seed,
        out_dir=out_dir,
        threads=threads,
        params=params,
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"not valid JSON: {exc}")
    return validate_config(data)
