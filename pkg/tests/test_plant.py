import math

import pytest

from ddc_grid import (
    IntegrationError,
    PlantParams,
    PlantState,
    electric_load,
    equilibrium_state,
    plant_derivatives,
    rk4_step,
)


def _step_response(P: float, dt: float, t_end: float, sample_every: float = 0.1):
    params = PlantParams()
    state = equilibrium_state(500.0, params)
    per_sample = round(sample_every / dt)
    out = []
    for k in range(round(t_end / dt)):
        state = rk4_step(state, P, params, dt)
        if (k + 1) % per_sample == 0:
            out.append(state.omega)
    return out


def test_electric_load_frequency_sensitivity():
    params = PlantParams()
    assert electric_load(50.0, 500.0, params) == 500.0
    assert electric_load(50.5, 100.0, params) == pytest.approx(100.026)
    assert electric_load(49.5, 100.0, params) == pytest.approx(99.974)


def test_equilibrium_has_zero_derivatives():
    params = PlantParams()
    state = equilibrium_state(500.0, params)
    assert state == PlantState(50.0, 500.0, 500.0)
    assert plant_derivatives(state, 500.0, params) == (0.0, 0.0, 0.0)


def test_fixed_point_is_held_exactly():
    params = PlantParams()
    state = equilibrium_state(480.0, params)
    for _ in range(10_000):
        state = rk4_step(state, 480.0, params, 0.01)
    assert state == PlantState(50.0, 480.0, 480.0)


def test_load_increase_lowers_frequency():
    params = PlantParams()
    state = equilibrium_state(500.0, params)
    d_omega, _, _ = plant_derivatives(state, 510.0, params)
    assert d_omega < 0
    for _ in range(100):
        state = rk4_step(state, 510.0, params, 0.01)
    assert state.omega < 50.0
    # droop raises mechanical power towards the new load
    assert state.P_m > 500.0


def test_secondary_control_restores_reference_frequency():
    params = PlantParams()
    state = equilibrium_state(500.0, params)
    lowest = highest = state.omega
    for _ in range(150_000):
        state = rk4_step(state, 510.0, params, 0.02)
        lowest = min(lowest, state.omega)
        highest = max(highest, state.omega)
    assert abs(state.omega - 50.0) < 1e-4
    assert 49.0 < lowest and highest < 51.0
    assert state.P_s == pytest.approx(510.0, abs=1e-2)


def test_rk4_is_fourth_order_on_step_response():
    reference = _step_response(510.0, 0.05 / 64, 2.0)
    errors = []
    for dt in (0.05, 0.025, 0.0125):
        traj = _step_response(510.0, dt, 2.0)
        errors.append(max(abs(a - b) for a, b in zip(traj, reference)))
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
    for order in orders:
        assert 3.8 <= order <= 4.2


def test_richardson_triplet_order():
    coarse, mid, fine = (_step_response(510.0, dt, 2.0) for dt in (0.05, 0.025, 0.0125))
    num = max(abs(a - b) for a, b in zip(coarse, mid))
    den = max(abs(a - b) for a, b in zip(mid, fine))
    assert 3.8 <= math.log2(num / den) <= 4.2


def test_non_physical_frequency_raises():
    params = PlantParams()
    with pytest.raises(IntegrationError):
        rk4_step(PlantState(50.0, 500.0, 500.0), 1e9, params, 0.01)
