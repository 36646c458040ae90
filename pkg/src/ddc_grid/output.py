from __future__ import annotations

import contextlib
import csv
import json
import os
import tempfile
from dataclasses import dataclass
from typing import IO, Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np

from .analytics import CcdfCurve, RunSummary, ccdf, summarize
from .config import config_to_dict
from .engine import SERIES_COUNT, SERIES_FLOAT, RunOutput

MANIFEST_VERSION = 1
TIMESERIES_COLUMNS = SERIES_FLOAT + SERIES_COUNT
_FLOAT_FMT = "%.12g"


@dataclass
class OutputBundle:
    directory: str
    timeseries: str
    ccdf: str
    summary: str
    manifest: str
    plot: Optional[str] = None


@contextlib.contextmanager
def _atomic_open(path: str) -> Iterator[IO[str]]:
    """Write to a temp file next to ``path`` and rename it into place on success."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_atomic(path: str, writer: Callable[[IO[str]], None]) -> str:
    with _atomic_open(path) as fh:
        writer(fh)
    return path


def write_json(path: str, obj: object) -> str:
    def _dump(fh: IO[str]) -> None:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return write_atomic(path, _dump)


def write_timeseries_csv(output: RunOutput, path: str, stride: int = 1) -> str:
    """Time series, every ``stride``-th sample; powers in units of P0."""
    sl = slice(None, None, max(1, int(stride)))
    cols = [getattr(output, name)[sl] for name in TIMESERIES_COLUMNS]
    table = np.column_stack(cols)
    fmt = [_FLOAT_FMT] * len(SERIES_FLOAT) + ["%d"] * len(SERIES_COUNT)
    return write_atomic(
        path,
        lambda fh: np.savetxt(
            fh, table, fmt=fmt, delimiter=",", header=",".join(TIMESERIES_COLUMNS), comments=""
        ),
    )


def write_ccdf_csv(curve: CcdfCurve, path: str) -> str:
    table = np.column_stack([curve.x, curve.r])
    return write_atomic(
        path,
        lambda fh: np.savetxt(
            fh, table, fmt=_FLOAT_FMT, delimiter=",", header="delta_omega,R", comments=""
        ),
    )


def build_plot_script(output: RunOutput, *, timeseries: str, ccdf_file: str) -> str:
    """gnuplot script for the frequency, load and pending traces and the CCDF."""
    ref = output.config.plant.omega_ref
    eps1 = output.config.ddc.epsilon1
    title = output.label or "run"
    return f"""# generated by ddc_grid; run with: gnuplot plot.gp
set datafile separator ','
set terminal pngcairo size 1000,1400
set output '{title}.png'
set multiplot layout 4,1 title '{title}'
set key autotitle columnhead
set xlabel 't (s)'
set ylabel 'omega (Hz)'
plot '{timeseries}' using 1:2 with lines, {ref - eps1} with lines dt 2 lc 'red' notitle, \\
     {ref + eps1} with lines dt 2 lc 'red' notitle
set ylabel 'Pe/P0'
plot '{timeseries}' using 1:4 with lines
set ylabel 'pending per device'
plot '{timeseries}' using 1:(($7+$8)/{output.config.fleet.N}) with lines title 'pending'
set logscale y
set xlabel 'delta omega (Hz)'
set ylabel 'R'
plot '{ccdf_file}' using 1:2 with lines
unset multiplot
"""


def manifest_dict(output: RunOutput, files: Dict[str, str]) -> Dict[str, object]:
    cfg = output.config
    return {
        "manifest_version": MANIFEST_VERSION,
        "label": output.label,
        "seed": cfg.seed,
        "window_T": cfg.comm.window_T,
        "population": dict(zip(("uncontrolled", "ddc", "ceddc"), output.population)),
        "steps": output.steps,
        "draws_consumed": output.draws_consumed,
        "files": files,
        "config": config_to_dict(cfg),
    }


def write_bundle(
    output: RunOutput,
    out_dir: str,
    *,
    summary: Optional[RunSummary] = None,
    curve: Optional[CcdfCurve] = None,
    plot: bool = True,
) -> OutputBundle:
    """Write the time series, CCDF, summary, plot script and manifest of one run."""
    os.makedirs(out_dir, exist_ok=True)
    curve = curve if curve is not None else ccdf(output.delta_omega)
    summary = summary if summary is not None else summarize(output, curve)
    files = {
        "timeseries": "timeseries.csv",
        "ccdf": "ccdf.csv",
        "summary": "summary.json",
    }
    write_timeseries_csv(
        output, os.path.join(out_dir, files["timeseries"]), output.config.export_stride
    )
    write_ccdf_csv(curve.decimate(), os.path.join(out_dir, files["ccdf"]))
    write_json(os.path.join(out_dir, files["summary"]), summary.as_dict())
    plot_path = None
    if plot:
        files["plot"] = "plot.gp"
        script = build_plot_script(output, timeseries=files["timeseries"], ccdf_file=files["ccdf"])
        plot_path = write_atomic(os.path.join(out_dir, files["plot"]), lambda fh: fh.write(script))
    manifest = write_json(os.path.join(out_dir, "manifest.json"), manifest_dict(output, files))
    return OutputBundle(
        directory=out_dir,
        timeseries=os.path.join(out_dir, files["timeseries"]),
        ccdf=os.path.join(out_dir, files["ccdf"]),
        summary=os.path.join(out_dir, files["summary"]),
        manifest=manifest,
        plot=plot_path,
    )


COMPARISON_COLUMNS = (
    "label",
    "value",
    "n1",
    "n2",
    "cluster_sizes",
    "window_T",
    "sigma2_omega",
    "mean_pending_per_device",
    "mean_pending_ddc",
    "mean_pending_ceddc",
    "R_epsilon",
    "R_epsilon1",
    "R_epsilon1_margin",
    "R_0.1",
    "max_abs_delta_omega",
)


def write_comparison(rows: Sequence[Dict[str, object]], out_dir: str) -> List[str]:
    """comparison.csv and comparison.json, one row per scenario."""

    def _csv(fh: IO[str]) -> None:
        w = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in COMPARISON_COLUMNS})

    return [
        write_atomic(os.path.join(out_dir, "comparison.csv"), _csv),
        write_json(os.path.join(out_dir, "comparison.json"), list(rows)),
    ]


def _cell(value: object) -> object:
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    if isinstance(value, float):
        return _FLOAT_FMT % value
    return "" if value is None else value
