"""Named scenario sets: policy comparison, cluster-size sweep and mixed populations.

All scenarios of a preset share seed, fleet, plant and timing, so they form one coupled
realization. Device counts scale with ``fleet.N`` (baseline N = 1000).
"""
from __future__ import annotations

import dataclasses
from typing import Callable, Dict, List, Tuple

from .exceptions import PresetError
from .models import ScenarioConfig

Scenario = Tuple[str, ScenarioConfig]

# (n1, n2) per mille of the fleet
MIXES = ((1000, 0), (800, 200), (500, 500), (200, 800), (0, 1000))
# cluster sizes as fractions of the fleet: singleton, quarter, half, all-to-all
CLUSTER_FRACTIONS = (0, 4, 2, 1)


def even_split(n: int, parts: int) -> Tuple[int, ...]:
    base, extra = divmod(n, parts)
    return tuple(base + (1 if i < extra else 0) for i in range(parts) if base or i < extra)


def uniform_clusters(n: int, size: int) -> Tuple[int, ...]:
    """Clusters of ``size`` devices, the last one taking any remainder."""
    size = max(1, min(int(size), n))
    count, rest = divmod(n, size)
    sizes = [size] * count
    if rest:
        sizes.append(rest)
    return tuple(sizes)


def _with(base: ScenarioConfig, **kwargs) -> ScenarioConfig:
    comm_kwargs = {k[5:]: kwargs.pop(k) for k in list(kwargs) if k.startswith("comm_")}
    comm = dataclasses.replace(base.comm, **comm_kwargs) if comm_kwargs else base.comm
    kwargs.setdefault("n1", None)
    kwargs.setdefault("n2", None)
    return dataclasses.replace(base, comm=comm, **kwargs)


def _policy_set(base: ScenarioConfig) -> List[Scenario]:
    n = base.fleet.N
    quarters = even_split(n, 4)
    return [
        ("no-ddc", _with(base, policy="none", comm_cluster_sizes=())),
        ("ddc", _with(base, policy="ddc", comm_cluster_sizes=())),
        ("ceddc-all", _with(base, policy="ceddc", comm_cluster_sizes=())),
        (
            f"ceddc-{len(quarters)}x{quarters[0]}",
            _with(base, policy="ceddc", comm_cluster_sizes=quarters),
        ),
    ]


def _cluster_sweep(base: ScenarioConfig) -> List[Scenario]:
    n = base.fleet.N
    out = []
    for frac in CLUSTER_FRACTIONS:
        size = 1 if frac == 0 else max(1, n // frac)
        sizes = uniform_clusters(n, size)
        out.append((f"cluster-{size}", _with(base, policy="ceddc", comm_cluster_sizes=sizes)))
    return out


def _mix_sweep(base: ScenarioConfig) -> List[Scenario]:
    n = base.fleet.N
    out = []
    for _, n2_permille in MIXES:
        n2 = round(n * n2_permille / 1000)
        cfg = _with(base, policy="mixed", n1=n - n2, n2=n2, comm_cluster_sizes=())
        out.append((f"mix-{n - n2}-{n2}", cfg))
    return out


PRESETS: Dict[str, Callable[[ScenarioConfig], List[Scenario]]] = {
    "policies": _policy_set,
    "clusters": _cluster_sweep,
    "mixes": _mix_sweep,
}

# numbered aliases
PRESET_ALIASES = {
    **{f"fig{i}": "policies" for i in (1, 2, 3, 4)},
    "fig5": "clusters",
    "fig6": "clusters",
    "fig7": "mixes",
    "fig8": "mixes",
}


def preset_names() -> List[str]:
    return sorted(PRESETS) + sorted(PRESET_ALIASES)


def preset_scenarios(name: str, base: ScenarioConfig) -> List[Scenario]:
    try:
        build = PRESETS[PRESET_ALIASES.get(name, name)]
    except KeyError:
        raise PresetError(f"unknown preset {name!r}; expected one of {', '.join(preset_names())}")
    return build(base)
