import numpy as np
import pytest

from ddc_grid import (
    FleetParams,
    GridSimError,
    ScenarioConfig,
    ccdf,
    exceedance,
    run,
    summarize,
    variance,
)


def test_ccdf_ranks():
    curve = ccdf([0.03, 0.01, 0.02])
    assert curve.x.tolist() == [0.01, 0.02, 0.03]
    assert curve.r.tolist() == [1.0, 0.5, 0.0]


def test_ccdf_ties_keep_rank_order():
    curve = ccdf([0.02, 0.01, 0.01])
    assert curve.x.tolist() == [0.01, 0.01, 0.02]
    assert curve.r.tolist() == [1.0, 0.5, 0.0]


def test_ccdf_needs_two_samples():
    with pytest.raises(GridSimError):
        ccdf([0.1])


def test_ccdf_against_counting_oracle():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        m = int(rng.integers(2, 40))
        samples = rng.random(m)
        curve = ccdf(samples)
        for x, r in zip(curve.x, curve.r):
            greater = np.count_nonzero(samples > x) / m
            assert abs(greater - r) <= 1.0 / (m - 1) + 1e-12


def test_variance_is_population_variance():
    assert variance([1.0, 2.0, 3.0, 4.0]) == pytest.approx(1.25)
    assert variance([50.0]) == 0.0


def test_variance_matches_two_pass():
    samples = 50.0 + 0.03 * np.random.default_rng(4).standard_normal(10_000)
    mean = sum(samples) / len(samples)
    two_pass = sum((s - mean) ** 2 for s in samples) / len(samples)
    assert variance(samples) == pytest.approx(two_pass, rel=1e-12)


def test_exceedance_step_convention():
    curve = ccdf([1.0, 2.0, 3.0])
    assert exceedance(curve, 0.5) == 1.0
    assert exceedance(curve, 1.0) == 1.0
    assert exceedance(curve, 2.5) == 0.5
    assert exceedance(curve, 3.0) == 0.0
    assert exceedance(curve, 10.0) == 0.0


def test_exceedance_against_scan():
    samples = np.random.default_rng(8).random(500)
    curve = ccdf(samples)
    m = len(samples)
    for x in np.linspace(0.0, 1.0, 37):
        below = np.count_nonzero(samples <= x)
        expected = 1.0 if below == 0 else 1.0 - (below - 1) / (m - 1)
        assert exceedance(curve, x) == pytest.approx(expected)


def test_decimate_keeps_ends_and_order():
    curve = ccdf(np.random.default_rng(1).random(50_000))
    small = curve.decimate(1000)
    assert len(small) <= 1001
    assert small.x[0] == curve.x[0]
    assert small.x[-1] == curve.x[-1]
    assert small.r[-1] == 0.0
    assert np.all(np.diff(small.x) >= 0)
    assert curve.decimate(len(curve)) is curve


def test_summary_recomputed_from_raw_series():
    cfg = ScenarioConfig(
        seed=2, t_total=10.0, t_transient=2.0, policy="mixed", n1=60, n2=40,
        fleet=FleetParams(N=100, p=0.5, q=0.5),
    )
    out = run(cfg, label="mix")
    s = summarize(out)
    k0 = 200
    omega = out.omega[k0:]
    assert s.samples == len(omega) == 801
    assert s.sigma2_omega == float(np.var(omega))
    assert s.max_abs_delta_omega == float(np.max(np.abs(omega - 50.0)))
    pending = out.pending_consuming[k0:].astype(np.int64) + out.pending_saving[k0:]
    assert s.mean_pending_per_device == pytest.approx(pending.mean() / 100)
    assert s.mean_pending_ddc == pytest.approx(out.pending_ddc[k0:].mean() / 60)
    assert s.mean_pending_ceddc == pytest.approx(out.pending_ceddc[k0:].mean() / 40)
    assert s.mean_load == pytest.approx(out.P[k0:].mean())
    assert set(s.exceedance) == {"epsilon", "epsilon1", "epsilon1_margin", "0.1"}
    assert s.label == "mix"
    assert s.as_dict()["samples"] == 801
