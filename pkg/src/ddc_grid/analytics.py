"""Statistics of frequency fluctuations and pending tasks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .engine import RunOutput
from .exceptions import GridSimError

EXPORT_MAX_POINTS = 10_000


@dataclass(frozen=True)
class CcdfCurve:
    """Rank estimator R(x_i) = 1 − (i−1)/(M−1) over ascending samples x_i."""

    x: np.ndarray
    r: np.ndarray

    def __len__(self) -> int:
        return int(self.x.size)

    def decimate(self, max_points: int = EXPORT_MAX_POINTS) -> "CcdfCurve":
        """Subset of points, log-spaced in distance from the top rank, ends kept."""
        m = len(self)
        if m <= max_points:
            return self
        from_top = np.unique(np.round(np.logspace(0, np.log10(m), max_points)).astype(np.int64))
        idx = np.unique(np.concatenate(([0], m - from_top)))
        return CcdfCurve(self.x[idx], self.r[idx])


def ccdf(samples: Sequence[float]) -> CcdfCurve:
    x = np.sort(np.asarray(samples, dtype=np.float64), kind="stable")
    m = x.size
    if m < 2:
        raise GridSimError(f"ccdf needs at least 2 samples, got {m}")
    r = 1.0 - np.arange(m, dtype=np.float64) / (m - 1)
    return CcdfCurve(x, r)


def variance(samples: Sequence[float]) -> float:
    """Population variance (no Bessel correction)."""
    return float(np.var(np.asarray(samples, dtype=np.float64)))


def exceedance(curve: CcdfCurve, x: float) -> float:
    """R at the largest sample ≤ x: 1 below the smallest sample, 0 from the largest on."""
    i = int(np.searchsorted(curve.x, x, side="right")) - 1
    if i < 0:
        return 1.0
    return float(curve.r[i])


@dataclass
class RunSummary:
    sigma2_omega: float
    mean_pending_per_device: float
    mean_pending_ddc: float
    mean_pending_ceddc: float
    max_abs_delta_omega: float
    exceedance: Dict[str, float]
    mean_load: float
    std_load: float
    samples: int
    label: str = ""

    def as_dict(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "sigma2_omega": self.sigma2_omega,
            "mean_pending_per_device": self.mean_pending_per_device,
            "mean_pending_ddc": self.mean_pending_ddc,
            "mean_pending_ceddc": self.mean_pending_ceddc,
            "max_abs_delta_omega": self.max_abs_delta_omega,
            "exceedance": dict(self.exceedance),
            "mean_load": self.mean_load,
            "std_load": self.std_load,
            "samples": self.samples,
        }


def _per_device(series: np.ndarray, n: int) -> float:
    if n == 0:
        return 0.0
    return float(np.mean(series, dtype=np.float64)) / n


# distance outside the recovery band still counted as confined
BAND_MARGIN = 0.02


def exceedance_thresholds(output: RunOutput) -> Dict[str, float]:
    ddc = output.config.ddc
    return {
        "epsilon": ddc.epsilon,
        "epsilon1": ddc.epsilon1,
        "epsilon1_margin": ddc.epsilon1 + BAND_MARGIN,
        "0.1": 0.1,
    }


def summarize(
    output: RunOutput,
    curve: Optional[CcdfCurve] = None,
    thresholds: Optional[Dict[str, float]] = None,
) -> RunSummary:
    """Post-transient statistics of one run."""
    cfg = output.config
    omega = output.post_transient("omega")
    if omega.size < 2:
        raise GridSimError("not enough post-transient samples to summarize")
    dw = np.abs(omega - cfg.plant.omega_ref)
    curve = curve if curve is not None else ccdf(dw)
    thresholds = thresholds or exceedance_thresholds(output)
    _, n_ddc, n_ceddc = output.population
    pending = output.post_transient("pending_consuming").astype(np.int64) + output.post_transient(
        "pending_saving"
    )
    on_count = output.post_transient("P") / cfg.fleet.P0
    return RunSummary(
        sigma2_omega=variance(omega),
        mean_pending_per_device=_per_device(pending, cfg.fleet.N),
        mean_pending_ddc=_per_device(output.post_transient("pending_ddc"), n_ddc),
        mean_pending_ceddc=_per_device(output.post_transient("pending_ceddc"), n_ceddc),
        max_abs_delta_omega=float(dw.max()),
        exceedance={name: exceedance(curve, x) for name, x in thresholds.items()},
        mean_load=float(on_count.mean()),
        std_load=float(on_count.std()),
        samples=int(omega.size),
        label=output.label,
    )
