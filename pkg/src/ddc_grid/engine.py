"""Fixed-step simulation loop coupling the appliance fleet, registers and plant.

One step, in this order (part of the reproducibility contract):

1. expire registers older than T;
2. for each device in ascending id: sample its intended flip, then try to follow it;
3. for each device in ascending id: maybe attempt a pending-task recovery;
4. take the total load P;
5. RK4 over dt with P frozen;
6. advance time and record the sample.

Every decision in a step sees the frequency at the start of the step.
"""
from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .comm import CommRegistry
from .config import validate_config
from .exceptions import ConfigError, GridSimError, IntegrationError
from .fleet import Fleet
from .models import Policy, PlantState, ScenarioConfig
from .plant import electric_load, equilibrium_state, rk4_step
from .rng import FleetDraws, scenario_stream

logger = logging.getLogger(__name__)

SERIES_FLOAT = ("t", "omega", "P", "Pe", "Pm", "Ps")
SERIES_COUNT = ("pending_consuming", "pending_saving", "pending_ddc", "pending_ceddc")


class RunEvent(dict):
    """Opaque event object for progress reporting."""


def _emit(cb: Optional[Callable[[RunEvent], None]], ev: RunEvent) -> None:
    if cb:
        try:
            cb(ev)
        except Exception:
            # Never let callbacks break a run
            pass


class _Series:
    def __init__(self, length: int):
        self.arrays: Dict[str, np.ndarray] = {}
        for name in SERIES_FLOAT:
            self.arrays[name] = np.empty(length, dtype=np.float64)
        for name in SERIES_COUNT:
            self.arrays[name] = np.empty(length, dtype=np.int32)

    def record(self, k: int, sim: "SimState") -> None:
        a = self.arrays
        plant = sim.plant
        fleet = sim.fleet
        consuming, saving = fleet.pending_counts()
        a["t"][k] = k * sim.config.dt
        a["omega"][k] = plant.omega
        a["P"][k] = sim.load
        a["Pe"][k] = electric_load(plant.omega, sim.load, sim.config.plant)
        a["Pm"][k] = plant.P_m
        a["Ps"][k] = plant.P_s
        a["pending_consuming"][k] = consuming
        a["pending_saving"][k] = saving
        a["pending_ddc"][k] = fleet.pending_for(Policy.DDC)
        a["pending_ceddc"][k] = fleet.pending_for(Policy.CEDDC)


@dataclass
class RunOutput:
    """Recorded series of one run; index k is time k·dt, k = 0..steps."""

    config: ScenarioConfig
    t: np.ndarray
    omega: np.ndarray
    P: np.ndarray
    Pe: np.ndarray
    Pm: np.ndarray
    Ps: np.ndarray
    pending_consuming: np.ndarray
    pending_saving: np.ndarray
    pending_ddc: np.ndarray
    pending_ceddc: np.ndarray
    flip_steps: np.ndarray
    flip_devices: np.ndarray
    steps: int
    draws_consumed: int
    draws_generated: int
    population: Tuple[int, int, int]
    label: str = ""

    @property
    def transient_index(self) -> int:
        return min(self.config.transient_index, self.steps)

    def post_transient(self, name: str) -> np.ndarray:
        return getattr(self, name)[self.transient_index :]

    @property
    def delta_omega(self) -> np.ndarray:
        """|ω − ω_R| over the post-transient samples."""
        return np.abs(self.post_transient("omega") - self.config.plant.omega_ref)

    def flip_log(self) -> List[Tuple[int, int]]:
        return list(zip(self.flip_steps.tolist(), self.flip_devices.tolist()))

    def check_draw_budget(self) -> None:
        n = self.config.fleet.N
        expected = 2 * n * self.steps
        if self.draws_consumed != expected or self.draws_generated != n + expected:
            raise GridSimError(
                f"draw budget violated: consumed {self.draws_consumed}, "
                f"generated {self.draws_generated}, expected {expected} per-step draws"
            )


@dataclass
class SimState:
    config: ScenarioConfig
    plant: PlantState
    fleet: Fleet
    comm: Optional[CommRegistry]
    draws: FleetDraws
    series: _Series
    load: float
    k: int = 0
    flip_log: List[Tuple[int, int]] = dataclasses.field(default_factory=list)

    @property
    def t(self) -> float:
        return self.k * self.config.dt

    def output(self, label: str = "") -> RunOutput:
        n = self.k + 1
        arrays = {name: arr[:n] for name, arr in self.series.arrays.items()}
        flips = np.asarray(self.flip_log, dtype=np.int64).reshape(-1, 2)
        return RunOutput(
            config=self.config,
            flip_steps=flips[:, 0],
            flip_devices=flips[:, 1],
            steps=self.k,
            draws_consumed=self.draws.consumed,
            draws_generated=self.draws.generated,
            population=self.config.population(),
            label=label,
            **arrays,
        )


def _policies(cfg: ScenarioConfig) -> np.ndarray:
    n_free, n_ddc, n_ceddc = cfg.population()
    return np.concatenate(
        [
            np.full(n_free, Policy.UNCONTROLLED, dtype=np.int8),
            np.full(n_ddc, Policy.DDC, dtype=np.int8),
            np.full(n_ceddc, Policy.CEDDC, dtype=np.int8),
        ]
    )


def init(config: ScenarioConfig) -> SimState:
    validate_config(config)
    n = config.fleet.N
    ddc = config.ddc
    ceddc = ddc
    if config.comm.epsilon1 is not None:
        ceddc = dataclasses.replace(ddc, epsilon1=config.comm.epsilon1)
    draws = FleetDraws(
        config.seed,
        n,
        flip_cut=max(config.fleet.p, config.fleet.q) * config.dt,
        recovery_cut=ddc.gamma * config.dt,
    )
    fleet = Fleet.stationary(
        config.fleet,
        _policies(config),
        draws.initial,
        ddc=ddc,
        omega_ref=config.plant.omega_ref,
        ceddc=ceddc,
        register_mode=config.comm.register_mode,
    )
    n_free, n_ddc, n_ceddc = config.population()
    comm = None
    if n_ceddc:
        comm = CommRegistry.from_sizes(
            n,
            config.resolved_clusters(),
            first_id=n_free + n_ddc,
            window_T=config.comm.window_T,
            rng=scenario_stream(config.seed, n),
            enabled=config.comm.enabled,
        )
        logger.debug(
            "%d clusters, sizes %s, T=%s",
            comm.n_clusters,
            [int(comm.members(c).size) for c in range(comm.n_clusters)],
            comm.window_T,
        )
    load = fleet.total_load()
    sim = SimState(
        config=config,
        plant=equilibrium_state(load, config.plant),
        fleet=fleet,
        comm=comm,
        draws=draws,
        series=_Series(config.n_steps + 1),
        load=load,
    )
    sim.series.record(0, sim)
    return sim


def step(sim: SimState) -> None:
    cfg = sim.config
    if sim.k >= cfg.n_steps:
        raise GridSimError("run already complete")
    dt = cfg.dt
    now = sim.k * dt
    omega = sim.plant.omega
    fleet, comm = sim.fleet, sim.comm
    flips, recoveries = sim.draws.next_step(cfg.n_steps - sim.k)
    if comm is not None:
        comm.expire(now)
    for j, u in flips:
        if fleet.sample_intended_flip(j, dt, u):
            sim.flip_log.append((sim.k, j))
            fleet.apply_intended_flip(j, omega, comm, now)
    for j, u in recoveries:
        fleet.attempt_recovery(j, omega, dt, u, comm, now)
    sim.load = fleet.params.P0 * fleet.on_count
    try:
        sim.plant = rk4_step(sim.plant, sim.load, cfg.plant, dt)
    except IntegrationError as e:
        raise IntegrationError(str(e), t=now + dt) from e
    sim.k += 1
    sim.series.record(sim.k, sim)


def run(
    config: ScenarioConfig,
    *,
    label: str = "",
    on_event: Optional[Callable[[RunEvent], None]] = None,
) -> RunOutput:
    sim = init(config)
    steps = config.n_steps
    every = max(1, steps // 20)
    _emit(on_event, RunEvent(type="run_start", label=label, steps=steps))
    logger.info("run %s: %d steps, population %s", label or "-", steps, config.population())
    while sim.k < steps:
        step(sim)
        if sim.k % every == 0:
            _emit(
                on_event,
                RunEvent(type="run_progress", label=label, step=sim.k, steps=steps, t=sim.t),
            )
    _emit(on_event, RunEvent(type="run_done", label=label, steps=steps))
    return sim.output(label)


_SHARED_FIELDS = ("seed", "dt", "t_total", "fleet", "plant")


def check_coupled(configs: Sequence[ScenarioConfig]) -> None:
    """Coupled scenarios may differ only in control policy and communication."""
    if not configs:
        raise ConfigError("", "no scenarios given")
    first = configs[0]
    for i, cfg in enumerate(configs[1:], start=1):
        for name in _SHARED_FIELDS:
            if getattr(cfg, name) != getattr(first, name):
                raise ConfigError(f"[{i}].{name}", "differs from scenario 0 in a coupled run")


def _run_job(
    cfg: ScenarioConfig, label: str, on_event: Optional[Callable[[RunEvent], None]] = None
) -> RunOutput:
    return run(cfg, label=label, on_event=on_event)


def run_many(
    configs: Sequence[ScenarioConfig],
    *,
    labels: Optional[Sequence[str]] = None,
    workers: int = 1,
    on_event: Optional[Callable[[RunEvent], None]] = None,
    job: Callable = _run_job,
) -> list:
    """Run independent scenarios, in a process pool when ``workers > 1``.

    ``job`` is called as ``job(config, label[, on_event])`` and must be a module-level
    function; progress events only reach ``on_event`` in sequential mode. Results come
    back in input order.
    """
    labels = list(labels) if labels is not None else [f"s{i}" for i in range(len(configs))]
    jobs = list(zip(configs, labels))
    results: list = [None] * len(jobs)
    total = len(jobs)
    if workers <= 1 or total <= 1:
        for idx, item in enumerate(jobs):
            results[idx] = job(item[0], item[1], on_event)
            _emit(on_event, RunEvent(type="scenario_done", label=item[1], index=idx, total=total))
        return results
    with ProcessPoolExecutor(max_workers=max(1, workers)) as ex:
        futs = {ex.submit(job, *item): idx for idx, item in enumerate(jobs)}
        for fut in as_completed(futs):
            idx = futs[fut]
            results[idx] = fut.result()
            ev = RunEvent(type="scenario_done", label=labels[idx], index=idx, total=total)
            _emit(on_event, ev)
    return results


def coupled_run(
    configs: Sequence[ScenarioConfig],
    *,
    labels: Optional[Sequence[str]] = None,
    workers: int = 1,
    on_event: Optional[Callable[[RunEvent], None]] = None,
) -> List[RunOutput]:
    """Run policies against one intended schedule (same seed, fleet, plant, timing)."""
    check_coupled(configs)
    return run_many(configs, labels=labels, workers=workers, on_event=on_event)
