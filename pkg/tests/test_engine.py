import dataclasses

import numpy as np
import pytest

from ddc_grid import (
    CommParams,
    ConfigError,
    FleetParams,
    GridSimError,
    ScenarioConfig,
    coupled_run,
    electric_load,
    init,
    plant_derivatives,
    run,
    step,
)


def _cfg(**kwargs) -> ScenarioConfig:
    base = dict(
        seed=5,
        t_total=20.0,
        t_transient=5.0,
        fleet=FleetParams(N=200, p=0.5, q=0.5),
    )
    base.update(kwargs)
    return ScenarioConfig(**base)


def test_series_length_and_time_axis():
    out = run(_cfg(t_total=1.0, t_transient=0.5))
    assert out.steps == 100
    assert len(out.omega) == 101
    assert out.t[0] == 0.0
    assert out.t[-1] == pytest.approx(1.0)


def test_init_starts_at_equilibrium():
    sim = init(_cfg())
    assert plant_derivatives(sim.plant, sim.load, sim.config.plant) == (0.0, 0.0, 0.0)
    assert sim.load == sim.fleet.on_count


def test_same_seed_is_bit_identical():
    a = run(_cfg(policy="ceddc"))
    b = run(_cfg(policy="ceddc"))
    assert np.array_equal(a.omega, b.omega)
    assert np.array_equal(a.pending_consuming, b.pending_consuming)
    assert a.flip_log() == b.flip_log()


def test_different_seed_differs():
    a = run(_cfg())
    b = run(_cfg(seed=6))
    assert not np.array_equal(a.P, b.P)


def test_draw_budget():
    out = run(_cfg(t_total=3.0, t_transient=1.0))
    assert out.draws_consumed == 2 * 200 * 300
    assert out.draws_generated == 200 + out.draws_consumed
    out.check_draw_budget()


def test_load_and_electric_power_are_consistent():
    out = run(_cfg())
    assert np.all(out.P == np.round(out.P))
    assert np.all((out.P >= 0) & (out.P <= 200))
    params = out.config.plant
    for k in (0, 700, len(out.omega) - 1):
        assert out.Pe[k] == electric_load(out.omega[k], out.P[k], params)


def test_uncontrolled_fleet_has_no_pending_tasks():
    out = run(_cfg(policy="none"))
    assert not out.pending_consuming.any()
    assert not out.pending_saving.any()


def test_pending_columns_split_by_policy():
    out = run(_cfg(policy="mixed", n1=150, n2=50))
    total = out.pending_consuming.astype(np.int64) + out.pending_saving
    assert np.array_equal(total, out.pending_ddc.astype(np.int64) + out.pending_ceddc)


def test_coupled_policies_share_intended_schedule():
    configs = [_cfg(policy=p) for p in ("none", "ddc", "ceddc")]
    outs = coupled_run(configs, labels=["none", "ddc", "ceddc"])
    assert len(outs[0].flip_log()) > 0
    assert outs[0].flip_log() == outs[1].flip_log() == outs[2].flip_log()


def test_coupled_run_rejects_different_fleets():
    configs = [_cfg(), _cfg(fleet=FleetParams(N=100, p=0.5, q=0.5))]
    with pytest.raises(ConfigError):
        coupled_run(configs)


@pytest.mark.parametrize(
    "comm",
    [
        CommParams(window_T=0.0),
        CommParams(cluster_sizes=(1,) * 200),
        CommParams(enabled=False),
    ],
)
def test_degenerate_ceddc_matches_ddc(comm):
    ddc = run(_cfg(policy="ddc"))
    ceddc = run(_cfg(policy="ceddc", comm=comm))
    assert np.array_equal(ddc.omega, ceddc.omega)
    assert np.array_equal(ddc.P, ceddc.P)
    assert np.array_equal(ddc.pending_consuming, ceddc.pending_consuming)
    assert np.array_equal(ddc.pending_saving, ceddc.pending_saving)
    assert np.array_equal(ddc.pending_ddc, ceddc.pending_ceddc)


def test_step_past_end_raises():
    sim = init(_cfg(t_total=0.02, t_transient=0.0))
    step(sim)
    step(sim)
    with pytest.raises(GridSimError):
        step(sim)


def test_invalid_config_rejected_at_init():
    with pytest.raises(ConfigError):
        init(_cfg(policy="mixed"))


def test_process_pool_gives_same_results():
    configs = [_cfg(t_total=2.0, t_transient=1.0, policy=p) for p in ("ddc", "ceddc")]
    seq = coupled_run(configs)
    par = coupled_run(configs, workers=2)
    for a, b in zip(seq, par):
        assert np.array_equal(a.omega, b.omega)


def test_progress_events():
    events = []
    run(_cfg(t_total=1.0, t_transient=0.5), label="x", on_event=events.append)
    types = [ev["type"] for ev in events]
    assert types[0] == "run_start"
    assert types[-1] == "run_done"
    assert types.count("run_progress") == 20


def test_stationary_on_count_without_control():
    cfg = _cfg(policy="none", t_total=300.0, t_transient=10.0)
    out = run(cfg)
    on = out.post_transient("P")
    assert abs(on.mean() - 100.0) < 5.0
    assert 4.0 < on.std() < 10.5


def test_epsilon1_override_only_changes_ceddc_runs():
    ddc = run(_cfg())
    widened = run(_cfg(comm=dataclasses.replace(CommParams(), epsilon1=0.2)))
    assert np.array_equal(ddc.omega, widened.omega)


def test_cluster_layout_is_logged(caplog):
    cfg = _cfg(
        policy="ceddc", t_total=1.0, t_transient=0.5, comm=CommParams(cluster_sizes=(50, 150))
    )
    with caplog.at_level("DEBUG", logger="ddc_grid.engine"):
        sim = init(cfg)
    assert sim.comm.n_clusters == 2
    assert "2 clusters, sizes [50, 150], T=5.0" in caplog.text
