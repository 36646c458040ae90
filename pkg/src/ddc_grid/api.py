from __future__ import annotations

import dataclasses
import functools
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .analytics import ccdf, summarize
from .config import config_from_dict, config_to_dict
from .engine import RunEvent, RunOutput, check_coupled, run, run_many
from .exceptions import ConfigError, SweepError
from .models import ScenarioConfig
from .output import OutputBundle, write_bundle, write_comparison
from .presets import preset_scenarios, uniform_clusters

logger = logging.getLogger(__name__)

EventCallback = Callable[[RunEvent], None]


@dataclass
class BatchResult:
    """Per-scenario bundles (when written) and summary rows of a preset or sweep."""

    rows: List[Dict[str, Any]]
    bundles: List[Optional[OutputBundle]]
    comparison: List[str]


def summary_row(output: RunOutput, *, value: Any = None) -> Dict[str, Any]:
    cfg = output.config
    s = summarize(output, ccdf(output.delta_omega))
    _, n_ddc, n_ceddc = output.population
    return {
        "label": output.label,
        "value": value,
        "n1": n_ddc,
        "n2": n_ceddc,
        "cluster_sizes": list(cfg.resolved_clusters()),
        "window_T": cfg.comm.window_T,
        "sigma2_omega": s.sigma2_omega,
        "mean_pending_per_device": s.mean_pending_per_device,
        "mean_pending_ddc": s.mean_pending_ddc,
        "mean_pending_ceddc": s.mean_pending_ceddc,
        "R_epsilon": s.exceedance["epsilon"],
        "R_epsilon1": s.exceedance["epsilon1"],
        "R_epsilon1_margin": s.exceedance["epsilon1_margin"],
        "R_0.1": s.exceedance["0.1"],
        "max_abs_delta_omega": s.max_abs_delta_omega,
    }


def run_scenario(
    config: ScenarioConfig,
    out_dir: str,
    *,
    label: str = "",
    plot: bool = True,
    on_event: Optional[EventCallback] = None,
) -> Tuple[RunOutput, OutputBundle]:
    """Run one scenario and write its bundle into ``out_dir``."""
    output = run(config, label=label, on_event=on_event)
    output.check_draw_budget()
    return output, write_bundle(output, out_dir, plot=plot)


def _scenario_job(
    cfg: ScenarioConfig,
    label: str,
    on_event: Optional[EventCallback] = None,
    *,
    out_dir: Optional[str] = None,
    plot: bool = True,
    values: Optional[Dict[str, Any]] = None,
) -> Tuple[Dict[str, Any], Optional[OutputBundle]]:
    # rows instead of RunOutputs come back from workers: series are large
    output = run(cfg, label=label, on_event=on_event)
    output.check_draw_budget()
    bundle = None
    if out_dir is not None:
        bundle = write_bundle(output, os.path.join(out_dir, label), plot=plot)
    value = values.get(label) if values else None
    return summary_row(output, value=value), bundle


def _batch(
    scenarios: Sequence[Tuple[str, ScenarioConfig]],
    job: Callable,
    out_dir: Optional[str],
    workers: int,
    on_event: Optional[EventCallback],
) -> BatchResult:
    labels = [label for label, _ in scenarios]
    configs = [cfg for _, cfg in scenarios]
    results = run_many(configs, labels=labels, workers=workers, on_event=on_event, job=job)
    rows = [row for row, _ in results]
    bundles = [bundle for _, bundle in results]
    comparison: List[str] = []
    if out_dir is not None:
        comparison = write_comparison(rows, out_dir)
    return BatchResult(rows=rows, bundles=bundles, comparison=comparison)


def run_preset(
    name: str,
    *,
    out_dir: Optional[str],
    seed: Optional[int] = None,
    base: Optional[ScenarioConfig] = None,
    workers: int = 1,
    plot: bool = True,
    on_event: Optional[EventCallback] = None,
) -> BatchResult:
    """Run every scenario of a preset on one coupled realization."""
    base = base or ScenarioConfig()
    if seed is not None:
        base = dataclasses.replace(base, seed=int(seed))
    scenarios = preset_scenarios(name, base)
    check_coupled([cfg for _, cfg in scenarios])
    logger.info("preset %s: %d scenarios", name, len(scenarios))
    job = functools.partial(_scenario_job, out_dir=out_dir, plot=plot)
    return _batch(scenarios, job, out_dir, workers, on_event)


def parse_value(text: str) -> Any:
    """CLI sweep value: JSON scalar when it parses, plain string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def with_parameter(base: ScenarioConfig, parameter: str, value: Any) -> ScenarioConfig:
    """Copy of ``base`` with one sweep parameter set (and re-validated)."""
    n = base.fleet.N
    raw = config_to_dict(base)
    if parameter == "cluster_size":
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise SweepError(f"cluster_size must be a positive integer, got {value!r}")
        raw.update(policy="ceddc", n1=None, n2=None)
        raw["comm"]["cluster_sizes"] = list(uniform_clusters(n, value))
    elif parameter == "n2":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SweepError(f"n2 must be an integer, got {value!r}")
        raw.update(policy="mixed", n1=n - value, n2=value)
        raw["comm"]["cluster_sizes"] = []
    else:
        head, _, tail = parameter.partition(".")
        target = raw
        key = head
        if tail:
            if not isinstance(raw.get(head), dict) or "." in tail:
                raise SweepError(f"unknown sweep parameter {parameter!r}")
            target, key = raw[head], tail
        if key not in target or isinstance(target[key], (dict, list)):
            raise SweepError(f"unknown sweep parameter {parameter!r}")
        target[key] = value
    try:
        return config_from_dict(raw)
    except ConfigError as e:
        raise ConfigError(e.path, f"{e.message} (sweep {parameter}={value!r})") from e


def sweep(
    base: ScenarioConfig,
    parameter: str,
    values: Sequence[Any],
    *,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    workers: int = 1,
    plot: bool = True,
    on_event: Optional[EventCallback] = None,
) -> BatchResult:
    """One run per value, common seed; rows carry σ²_ω, pending, R(0.1) and max|Δω|."""
    if seed is not None:
        base = dataclasses.replace(base, seed=int(seed))
    if not values:
        raise SweepError("no sweep values given")
    scenarios = [(f"{parameter}={v}", with_parameter(base, parameter, v)) for v in values]
    by_label = {label: v for (label, _), v in zip(scenarios, values)}
    job = functools.partial(_scenario_job, values=by_label, out_dir=out_dir, plot=plot)
    return _batch(scenarios, job, out_dir, workers, on_event)
