"""Scenario configuration: JSON in, validated ``ScenarioConfig`` out.

Every field is optional; missing ones take the baseline values, so ``{}`` is a
complete configuration. Errors carry the dotted path of the offending field.
"""
from __future__ import annotations

import dataclasses
import json
import os
from typing import Any, Dict, Mapping

from .exceptions import ConfigError
from .models import (
    POLICY_MODES,
    REGISTER_MODES,
    CommParams,
    DdcParams,
    FleetParams,
    PlantParams,
    ScenarioConfig,
)

OUT_DIR_ENV = "DDC_GRID_OUT_DIR"

_SECTIONS = {
    "plant": PlantParams,
    "fleet": FleetParams,
    "ddc": DdcParams,
    "comm": CommParams,
}
_INT_FIELDS = {"seed", "n1", "n2", "export_stride", "fleet.N"}
# event probabilities per step must stay first-order small
_MAX_STEP_PROB = 0.1


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV) or "output"


def _number(path: str, value: Any, *, integer: bool = False, optional: bool = False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected {'integer' if integer else 'number'}, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected integer, got {value!r}")
        return int(value)
    return float(value)


def _section(name: str, cls, raw: Any):
    if raw is None:
        return cls()
    if not isinstance(raw, Mapping):
        raise ConfigError(name, "expected an object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        if key not in known:
            raise ConfigError(path, "unknown field")
        if key == "enabled":
            if not isinstance(value, bool):
                raise ConfigError(path, f"expected boolean, got {value!r}")
            kwargs[key] = value
        elif key == "register_mode":
            if value not in REGISTER_MODES:
                raise ConfigError(path, f"expected one of {', '.join(REGISTER_MODES)}")
            kwargs[key] = value
        elif key == "cluster_sizes":
            if not isinstance(value, (list, tuple)):
                raise ConfigError(path, "expected a list of integers")
            kwargs[key] = tuple(
                _number(f"{path}[{i}]", v, integer=True) for i, v in enumerate(value)
            )
        else:
            kwargs[key] = _number(
                path, value, integer=path in _INT_FIELDS, optional=(path == "comm.epsilon1")
            )
    return cls(**kwargs)


def config_from_dict(raw: Mapping[str, Any]) -> ScenarioConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("", "configuration must be a JSON object")
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    kwargs: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown field")
        if key in _SECTIONS:
            kwargs[key] = _section(key, _SECTIONS[key], value)
        elif key == "policy":
            if value not in POLICY_MODES:
                raise ConfigError(key, f"expected one of {', '.join(POLICY_MODES)}")
            kwargs[key] = value
        else:
            kwargs[key] = _number(
                key, value, integer=key in _INT_FIELDS, optional=key in ("n1", "n2")
            )
    cfg = ScenarioConfig(**kwargs)
    validate_config(cfg)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> Dict[str, Any]:
    """JSON-ready echo of every field; feeding it back gives an equal config."""
    out = dataclasses.asdict(cfg)
    out["comm"]["cluster_sizes"] = list(cfg.comm.cluster_sizes)
    return out


def _positive(path: str, value: float) -> None:
    if not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")


def validate_config(cfg: ScenarioConfig) -> None:
    for name in ("omega_ref", "H", "tau_g", "R_droop", "K", "P_G"):
        _positive(f"plant.{name}", getattr(cfg.plant, name))
    if cfg.plant.D < 0:
        raise ConfigError("plant.D", f"must be >= 0, got {cfg.plant.D!r}")

    _positive("dt", cfg.dt)
    _positive("t_total", cfg.t_total)
    if cfg.t_transient < 0 or cfg.t_transient >= cfg.t_total:
        raise ConfigError("t_transient", "must satisfy 0 <= t_transient < t_total")
    if cfg.n_steps - cfg.transient_index + 1 < 2:
        raise ConfigError(
            "t_transient", f"leaves fewer than 2 samples after the transient at dt={cfg.dt!r}"
        )
    if cfg.export_stride < 1:
        raise ConfigError("export_stride", "must be >= 1")

    fleet = cfg.fleet
    if fleet.N < 1:
        raise ConfigError("fleet.N", "must be >= 1")
    _positive("fleet.p", fleet.p)
    _positive("fleet.q", fleet.q)
    _positive("fleet.P0", fleet.P0)
    for name in ("p", "q"):
        if getattr(fleet, name) * cfg.dt >= _MAX_STEP_PROB:
            raise ConfigError(f"fleet.{name}", f"{name}*dt must be < {_MAX_STEP_PROB}")

    ddc = cfg.ddc
    _positive("ddc.epsilon", ddc.epsilon)
    if not ddc.epsilon < ddc.epsilon1:
        raise ConfigError("ddc.epsilon1", "must be greater than ddc.epsilon")
    if ddc.gamma < 0 or ddc.gamma * cfg.dt >= _MAX_STEP_PROB:
        raise ConfigError("ddc.gamma", f"must satisfy 0 <= gamma*dt < {_MAX_STEP_PROB}")

    comm = cfg.comm
    if comm.window_T < 0:
        raise ConfigError("comm.window_T", "must be >= 0")
    if comm.epsilon1 is not None and not comm.epsilon1 > ddc.epsilon:
        raise ConfigError("comm.epsilon1", "must be greater than ddc.epsilon")

    if cfg.policy == "mixed":
        if cfg.n1 is None or cfg.n2 is None:
            raise ConfigError("policy", "mixed policy requires n1 and n2")
        if cfg.n1 < 0 or cfg.n2 < 0 or cfg.n1 + cfg.n2 != fleet.N:
            raise ConfigError("n2", f"n1 + n2 must equal fleet.N={fleet.N}")

    n_ceddc = cfg.population()[2]
    if comm.cluster_sizes:
        for i, size in enumerate(comm.cluster_sizes):
            if size < 1:
                raise ConfigError(f"comm.cluster_sizes[{i}]", "must be >= 1")
        if sum(comm.cluster_sizes) != n_ceddc:
            raise ConfigError(
                "comm.cluster_sizes",
                f"sizes sum to {sum(comm.cluster_sizes)}, expected {n_ceddc} CeDDC devices",
            )


def parse_config(path: str) -> ScenarioConfig:
    """Load a scenario JSON file (or a bundle manifest, whose ``config`` is used)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("", f"invalid JSON in {path}: {e}")
    if isinstance(raw, dict) and "manifest_version" in raw and "config" in raw:
        raw = raw["config"]
    return config_from_dict(raw)
