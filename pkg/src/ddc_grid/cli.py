"""Command-line entrypoint: ``ddc-grid run | preset | sweep``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from typing import List, Optional

from .api import parse_value, run_preset, run_scenario, sweep
from .config import default_out_dir, parse_config
from .exceptions import GridSimError
from .models import ScenarioConfig
from .presets import preset_names


def _on_event(ev: dict) -> None:
    t = ev.get("type")
    if t == "run_start":
        print(f"[ run ] {ev.get('label') or '-'}: {ev.get('steps')} steps", flush=True)
    elif t == "run_progress":
        pct = 100 * ev.get("step", 0) // max(1, ev.get("steps", 1))
        print(f"[ {pct:3d}% ] t={ev.get('t', 0.0):.0f} s", flush=True)
    elif t == "scenario_done":
        print(f"[ {ev.get('index', 0) + 1}/{ev.get('total')} ] {ev.get('label')} ok", flush=True)


def _base(args: argparse.Namespace) -> ScenarioConfig:
    cfg = parse_config(args.config) if getattr(args, "config", None) else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "t_total", None) is not None:
        changes["t_total"] = args.t_total
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    return cfg


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ddc-grid",
        description="Simulate grid frequency under decentralized demand control of appliances",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config)")
        p.add_argument(
            "--out", default=None, help="Output directory (default: $DDC_GRID_OUT_DIR or output/)"
        )
        p.add_argument("--no-plot", action="store_true", help="Skip the gnuplot script")

    p_run = sub.add_parser("run", help="Run one scenario")
    p_run.add_argument("--config", required=True, help="Scenario JSON (or a manifest.json)")
    p_run.add_argument("--label", default="", help="Run label used in outputs")
    common(p_run)

    p_pre = sub.add_parser("preset", help="Run a named comparison on one coupled realization")
    p_pre.add_argument("name", choices=preset_names(), help="Preset name")
    p_pre.add_argument("--config", default=None, help="Base scenario JSON")
    p_pre.add_argument("--t-total", type=float, default=None, help="Override run length (s)")
    p_pre.add_argument("--workers", type=int, default=1, help="Parallel processes")
    common(p_pre)

    p_sw = sub.add_parser("sweep", help="One run per value of a parameter")
    p_sw.add_argument("--config", required=True, help="Base scenario JSON")
    p_sw.add_argument("--param", required=True, help="e.g. comm.window_T, cluster_size, n2")
    p_sw.add_argument("--values", required=True, help="Comma-separated values")
    p_sw.add_argument("--t-total", type=float, default=None, help="Override run length (s)")
    p_sw.add_argument("--workers", type=int, default=1, help="Parallel processes")
    common(p_sw)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    out_dir = args.out or default_out_dir()
    try:
        base = _base(args)
        if args.command == "run":
            _, bundle = run_scenario(
                base, out_dir, label=args.label, plot=not args.no_plot, on_event=_on_event
            )
            print(f"[ out ] {bundle.directory}")
        elif args.command == "preset":
            result = run_preset(
                args.name,
                out_dir=out_dir,
                base=base,
                workers=max(1, args.workers),
                plot=not args.no_plot,
                on_event=_on_event,
            )
            for path in result.comparison:
                print(f"[ out ] {path}")
        else:
            values = [parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
            result = sweep(
                base,
                args.param,
                values,
                out_dir=out_dir,
                workers=max(1, args.workers),
                plot=not args.no_plot,
                on_event=_on_event,
            )
            for path in result.comparison:
                print(f"[ out ] {path}")
        print("[✓] Done.")
        return 0
    except GridSimError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
