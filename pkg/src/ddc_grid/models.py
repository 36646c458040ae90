from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional, Tuple


class Policy(enum.IntEnum):
    UNCONTROLLED = 0
    DDC = 1
    CEDDC = 2


class Direction(enum.Enum):
    ON = "on"
    OFF = "off"


class TaskKind(enum.Enum):
    CONSUMING = "consuming"  # switch-on deferred
    SAVING = "saving"  # switch-off deferred


@dataclass(frozen=True)
class PlantParams:
    """Aggregate generator and governor. Powers are in units of P0."""

    omega_ref: float = 50.0
    H: float = 2.26
    tau_g: float = 0.78
    R_droop: float = 0.07
    K: float = 50.0
    P_G: float = 500.0
    D: float = 0.026


@dataclass(frozen=True)
class PlantState:
    omega: float
    P_m: float
    P_s: float


@dataclass(frozen=True)
class FleetParams:
    N: int = 1000
    p: float = 6.55e-4  # off -> on intended rate (1/s)
    q: float = 6.55e-4  # on -> off intended rate (1/s)
    P0: float = 1.0


@dataclass(frozen=True)
class DdcParams:
    epsilon: float = 0.05
    epsilon1: float = 0.06
    gamma: float = 1.2e-3


@dataclass(frozen=True)
class CommParams:
    enabled: bool = True
    window_T: float = 5.0
    cluster_sizes: Tuple[int, ...] = ()
    # recovery threshold for communicating devices; None keeps ddc.epsilon1
    epsilon1: Optional[float] = None
    register_mode: str = "unit"


POLICY_MODES = ("none", "ddc", "ceddc", "mixed")
REGISTER_MODES = ("unit", "power")


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    dt: float = 0.01
    t_total: float = 2.0e4
    t_transient: float = 200.0
    plant: PlantParams = dataclasses.field(default_factory=PlantParams)
    fleet: FleetParams = dataclasses.field(default_factory=FleetParams)
    ddc: DdcParams = dataclasses.field(default_factory=DdcParams)
    comm: CommParams = dataclasses.field(default_factory=CommParams)
    policy: str = "ddc"
    n1: Optional[int] = None
    n2: Optional[int] = None
    export_stride: int = 100

    @property
    def n_steps(self) -> int:
        return int(round(self.t_total / self.dt))

    @property
    def transient_index(self) -> int:
        """First series index counted in statistics."""
        k = int(round(self.t_transient / self.dt))
        return k if k * self.dt >= self.t_transient else k + 1

    def population(self) -> Tuple[int, int, int]:
        """(uncontrolled, ddc, ceddc) device counts."""
        n = self.fleet.N
        if self.policy == "none":
            return n, 0, 0
        if self.policy == "ddc":
            return 0, n, 0
        if self.policy == "ceddc":
            return 0, 0, n
        return 0, int(self.n1 or 0), int(self.n2 or 0)

    def resolved_clusters(self) -> Tuple[int, ...]:
        n_ceddc = self.population()[2]
        if n_ceddc == 0:
            return ()
        return tuple(self.comm.cluster_sizes) or (n_ceddc,)


@dataclass
class PowerReleased:
    value: float = 0.0
    set_at: float = 0.0


@dataclass
class Device:
    """Snapshot of one appliance; the fleet itself stores columns, not Device objects."""

    id: int
    actual: bool
    intended: bool
    policy: Policy
    cluster: Optional[int] = None
    register: PowerReleased = dataclasses.field(default_factory=PowerReleased)

    @property
    def pending(self) -> Optional[TaskKind]:
        if self.actual == self.intended:
            return None
        return TaskKind.CONSUMING if self.intended else TaskKind.SAVING
