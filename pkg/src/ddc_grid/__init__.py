"""ddc_grid public API (library-first).

Exports the simulation engine, analytics and scenario runners. The CLI is thin and
delegates to these.
"""
from __future__ import annotations

from .analytics import CcdfCurve, RunSummary, ccdf, exceedance, summarize, variance
from .api import BatchResult, run_preset, run_scenario, sweep, with_parameter
from .comm import CommRegistry
from .config import config_from_dict, config_to_dict, parse_config, validate_config
from .engine import RunOutput, coupled_run, init, run, run_many, step
from .exceptions import ConfigError, GridSimError, IntegrationError, PresetError, SweepError
from .fleet import Fleet, ddc_gate, recovery_gate
from .models import (
    CommParams,
    DdcParams,
    Device,
    Direction,
    FleetParams,
    PlantParams,
    PlantState,
    Policy,
    PowerReleased,
    ScenarioConfig,
    TaskKind,
)
from .output import write_bundle
from .plant import electric_load, equilibrium_state, plant_derivatives, rk4_step
from .presets import PRESETS, preset_scenarios

__all__ = [
    "CcdfCurve",
    "RunSummary",
    "ccdf",
    "exceedance",
    "summarize",
    "variance",
    "BatchResult",
    "run_preset",
    "run_scenario",
    "sweep",
    "with_parameter",
    "CommRegistry",
    "config_from_dict",
    "config_to_dict",
    "parse_config",
    "validate_config",
    "RunOutput",
    "coupled_run",
    "init",
    "run",
    "run_many",
    "step",
    "ConfigError",
    "GridSimError",
    "IntegrationError",
    "PresetError",
    "SweepError",
    "Fleet",
    "ddc_gate",
    "recovery_gate",
    "CommParams",
    "DdcParams",
    "Device",
    "Direction",
    "FleetParams",
    "PlantParams",
    "PlantState",
    "Policy",
    "PowerReleased",
    "ScenarioConfig",
    "TaskKind",
    "write_bundle",
    "electric_load",
    "equilibrium_state",
    "plant_derivatives",
    "rk4_step",
    "PRESETS",
    "preset_scenarios",
]
