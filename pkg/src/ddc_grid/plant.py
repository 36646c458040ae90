"""Aggregate power plant: swing equation with droop and integral control.

    dω/dt   = ω / (2 H P_G) · (P_m − P_e)
    dP_m/dt = (P_s − P_m − P_G/(R ω_R) · (ω − ω_R)) / τ_g
    dP_s/dt = −K/ω_R · (ω − ω_R)
    P_e     = (1 + D (ω − ω_R)/ω_R) · P

P is the frequency-insensitive load, held constant across one integration step.
"""
from __future__ import annotations

import math
from typing import Tuple

from .exceptions import IntegrationError
from .models import PlantParams, PlantState


def electric_load(omega: float, P: float, params: PlantParams) -> float:
    return (1.0 + params.D * (omega - params.omega_ref) / params.omega_ref) * P


def _rhs(
    omega: float, P_m: float, P_s: float, P: float, params: PlantParams
) -> Tuple[float, float, float]:
    ref = params.omega_ref
    dev = omega - ref
    P_e = (1.0 + params.D * dev / ref) * P
    d_omega = omega / (2.0 * params.H * params.P_G) * (P_m - P_e)
    d_Pm = (P_s - P_m - params.P_G / (params.R_droop * ref) * dev) / params.tau_g
    d_Ps = -params.K / ref * dev
    return d_omega, d_Pm, d_Ps


def plant_derivatives(
    state: PlantState, P: float, params: PlantParams
) -> Tuple[float, float, float]:
    """Right-hand sides (dω/dt, dP_m/dt, dP_s/dt) for load P."""
    return _rhs(state.omega, state.P_m, state.P_s, P, params)


def rk4_step(state: PlantState, P: float, params: PlantParams, dt: float) -> PlantState:
    """Classical RK4 over dt; P_e is re-evaluated at every stage."""
    w0, m0, s0 = state.omega, state.P_m, state.P_s
    h2 = 0.5 * dt
    a1, b1, c1 = _rhs(w0, m0, s0, P, params)
    a2, b2, c2 = _rhs(w0 + h2 * a1, m0 + h2 * b1, s0 + h2 * c1, P, params)
    a3, b3, c3 = _rhs(w0 + h2 * a2, m0 + h2 * b2, s0 + h2 * c2, P, params)
    a4, b4, c4 = _rhs(w0 + dt * a3, m0 + dt * b3, s0 + dt * c3, P, params)
    k = dt / 6.0
    omega = w0 + k * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    if not math.isfinite(omega) or omega <= 0.0:
        raise IntegrationError(f"frequency left the physical range: omega={omega!r}")
    return PlantState(
        omega=omega,
        P_m=m0 + k * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        P_s=s0 + k * (c1 + 2.0 * c2 + 2.0 * c3 + c4),
    )


def equilibrium_state(P: float, params: PlantParams) -> PlantState:
    """Fixed point for a constant load P at ω = ω_R."""
    return PlantState(omega=params.omega_ref, P_m=float(P), P_s=float(P))
