"""Population of two-state appliances under DDC / CeDDC control.

Each device carries an *intended* state, driven by the user's random schedule, and an
*actual* state, which is what the grid sees. A mismatch is a pending task: consuming
when a switch-on was deferred, saving when a switch-off was deferred. The intended
process consumes one draw per device per step whatever the control policy, so the same
seed gives every policy the same schedule.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from .comm import CommRegistry
from .exceptions import GridSimError
from .models import (
    DdcParams,
    Device,
    Direction,
    FleetParams,
    Policy,
    PowerReleased,
    TaskKind,
)

_CONSUMING, _SAVING = 0, 1


def ddc_gate(direction: Direction, omega: float, params: DdcParams, omega_ref: float) -> bool:
    """Whether a DDC device may perform a scheduled switch right now."""
    if direction is Direction.ON:
        return omega > omega_ref - params.epsilon
    return omega < omega_ref + params.epsilon


def recovery_gate(task: TaskKind, omega: float, params: DdcParams, omega_ref: float) -> bool:
    if task is TaskKind.CONSUMING:
        return omega > omega_ref + params.epsilon1
    return omega < omega_ref - params.epsilon1


class Fleet:
    def __init__(
        self,
        params: FleetParams,
        policies: Sequence[int],
        *,
        actual: Sequence[bool],
        intended: Optional[Sequence[bool]] = None,
        ddc: DdcParams = DdcParams(),
        omega_ref: float = 50.0,
        ceddc: Optional[DdcParams] = None,
        register_mode: str = "unit",
    ):
        self.params = params
        self.ddc = ddc
        self.ceddc = ceddc or ddc
        self.omega_ref = float(omega_ref)
        self.register_mode = register_mode
        self.policy = np.asarray(policies, dtype=np.int8)
        self.actual = np.array(actual, dtype=bool)
        self.intended = np.array(actual if intended is None else intended, dtype=bool)
        n = params.N
        if not (self.policy.shape == self.actual.shape == self.intended.shape == (n,)):
            raise GridSimError(f"fleet arrays must all have length N={n}")
        free = self.policy == Policy.UNCONTROLLED
        if np.any(self.actual[free] != self.intended[free]):
            raise GridSimError("uncontrolled devices cannot hold pending tasks")
        self.on_count = int(np.count_nonzero(self.actual))
        # pending tasks per (policy, kind)
        self._pending = np.zeros((len(Policy), 2), dtype=np.int64)
        for pol in Policy:
            sel = self.policy == pol
            self._pending[pol, _CONSUMING] = np.count_nonzero(sel & self.intended & ~self.actual)
            self._pending[pol, _SAVING] = np.count_nonzero(sel & ~self.intended & self.actual)

    @classmethod
    def stationary(
        cls, params: FleetParams, policies: Sequence[int], draws: np.ndarray, **kwargs
    ) -> "Fleet":
        """Each device on with probability p/(p+q), one draw per device in id order."""
        on = np.asarray(draws) < params.p / (params.p + params.q)
        return cls(params, policies, actual=on, intended=on.copy(), **kwargs)

    @property
    def N(self) -> int:
        return self.params.N

    def params_for(self, device_id: int) -> DdcParams:
        return self.ceddc if self.policy[device_id] == Policy.CEDDC else self.ddc

    def pending_task(self, device_id: int) -> Optional[TaskKind]:
        want = self.intended[device_id]
        if want == self.actual[device_id]:
            return None
        return TaskKind.CONSUMING if want else TaskKind.SAVING

    def _device(self, device_id: int, comm: Optional[CommRegistry] = None) -> Device:
        register = comm.register(device_id) if comm is not None else PowerReleased()
        return Device(
            id=device_id,
            actual=bool(self.actual[device_id]),
            intended=bool(self.intended[device_id]),
            policy=Policy(int(self.policy[device_id])),
            cluster=comm.cluster(device_id) if comm is not None else None,
            register=register,
        )

    def _account(self, device_id: int, before: Optional[TaskKind]) -> None:
        after = self.pending_task(device_id)
        if before is after:
            return
        pol = self.policy[device_id]
        if before is not None:
            self._pending[pol, _CONSUMING if before is TaskKind.CONSUMING else _SAVING] -= 1
        if after is not None:
            self._pending[pol, _CONSUMING if after is TaskKind.CONSUMING else _SAVING] += 1

    def _switch(
        self, device_id: int, on: bool, comm: Optional[CommRegistry], now: float
    ) -> None:
        before = self.pending_task(device_id)
        self.actual[device_id] = on
        self.on_count += 1 if on else -1
        self._account(device_id, before)
        if comm is not None and self.policy[device_id] == Policy.CEDDC:
            power = self.params.P0 if self.register_mode == "power" else 1.0
            comm.record_switch(
                device_id, Direction.ON if on else Direction.OFF, now, power=power
            )

    def _match(
        self, device_id: int, direction: Direction, comm: Optional[CommRegistry]
    ) -> bool:
        if comm is None or self.policy[device_id] != Policy.CEDDC:
            return False
        cid = comm.cluster(device_id)
        if cid is None:
            return False
        if self.register_mode == "power":
            need = self.params.P0 if direction is Direction.ON else -self.params.P0
            return comm.find_and_consume_power(cid, need, searcher=device_id) is not None
        return comm.find_and_consume(cid, direction, searcher=device_id) is not None

    def sample_intended_flip(self, device_id: int, dt: float, draw: float) -> bool:
        """Advance the user's schedule for one step; returns True if it flipped."""
        was_on = bool(self.intended[device_id])
        rate = self.params.q if was_on else self.params.p
        if draw >= rate * dt:
            return False
        before = self.pending_task(device_id)
        self.intended[device_id] = not was_on
        self._account(device_id, before)
        return True

    def apply_intended_flip(
        self,
        device_id: int,
        omega: float,
        comm: Optional[CommRegistry] = None,
        now: float = 0.0,
    ) -> bool:
        """Try to follow a fresh intended flip; returns True if the device switched.

        A blocked DDC flip leaves a pending task; a flip back to the actual state
        annihilates the task that was pending.
        """
        want = bool(self.intended[device_id])
        if want == bool(self.actual[device_id]):
            return False
        pol = self.policy[device_id]
        direction = Direction.ON if want else Direction.OFF
        if (
            pol == Policy.UNCONTROLLED
            or ddc_gate(direction, omega, self.params_for(device_id), self.omega_ref)
            or self._match(device_id, direction, comm)
        ):
            self._switch(device_id, want, comm, now)
            return True
        return False

    def attempt_recovery(
        self,
        device_id: int,
        omega: float,
        dt: float,
        draw: float,
        comm: Optional[CommRegistry] = None,
        now: float = 0.0,
    ) -> bool:
        task = self.pending_task(device_id)
        if task is None:
            return False
        params = self.params_for(device_id)
        if draw >= params.gamma * dt:
            return False
        direction = Direction.ON if task is TaskKind.CONSUMING else Direction.OFF
        if recovery_gate(task, omega, params, self.omega_ref) or self._match(
            device_id, direction, comm
        ):
            self._switch(device_id, bool(self.intended[device_id]), comm, now)
            return True
        return False

    def total_load(self) -> float:
        return self.params.P0 * int(np.count_nonzero(self.actual))

    def pending_counts(self) -> Tuple[int, int]:
        """(consuming, saving) pending tasks over the whole fleet."""
        consuming, saving = self._pending.sum(axis=0)
        return int(consuming), int(saving)

    def pending_for(self, policy: Policy) -> int:
        return int(self._pending[policy].sum())
