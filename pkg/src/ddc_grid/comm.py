"""Cluster-local power-released registers (communication-enhanced DDC).

A device that switches ON writes −1 (or −P) into its register, a device that switches
OFF writes +1 (or +P). For ``window_T`` seconds the entry is a slot that one other
device of the same cluster may consume to perform the opposite switch regardless of
the frequency. Searches never leave the searcher's cluster and never read the
searcher's own register.
"""
from __future__ import annotations

import logging
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .exceptions import GridSimError
from .models import Direction, PowerReleased

logger = logging.getLogger(__name__)

_POWER_TOL = 1e-12


class CommRegistry:
    def __init__(
        self,
        n_devices: int,
        clusters: Sequence[Sequence[int]],
        window_T: float,
        *,
        rng: Optional[np.random.Generator] = None,
        enabled: bool = True,
    ):
        self.window_T = float(window_T)
        self.enabled = bool(enabled)
        self.value = np.zeros(n_devices, dtype=np.float64)
        self.set_at = np.zeros(n_devices, dtype=np.float64)
        self.cluster_of = np.full(n_devices, -1, dtype=np.int64)
        self._members: list[np.ndarray] = []
        for cid, members in enumerate(clusters):
            ids = np.asarray(sorted(int(m) for m in members), dtype=np.int64)
            if ids.size and (ids[0] < 0 or ids[-1] >= n_devices):
                raise GridSimError(f"cluster {cid} references a device outside 0..{n_devices - 1}")
            if np.any(self.cluster_of[ids] >= 0) or np.unique(ids).size != ids.size:
                raise GridSimError(f"cluster {cid} overlaps another cluster")
            self.cluster_of[ids] = cid
            self._members.append(ids)
        self._rng = rng
        # devices whose register is non-zero, with the time it was set
        self._live: Dict[int, float] = {}

    @classmethod
    def from_sizes(
        cls,
        n_devices: int,
        sizes: Iterable[int],
        *,
        first_id: int = 0,
        window_T: float,
        rng: Optional[np.random.Generator] = None,
        enabled: bool = True,
    ) -> "CommRegistry":
        """Consecutive clusters starting at ``first_id``."""
        clusters = []
        start = first_id
        for size in sizes:
            clusters.append(range(start, start + int(size)))
            start += int(size)
        return cls(n_devices, clusters, window_T, rng=rng, enabled=enabled)

    @property
    def n_clusters(self) -> int:
        return len(self._members)

    def members(self, cluster_id: int) -> np.ndarray:
        return self._members[cluster_id]

    def cluster(self, device_id: int) -> Optional[int]:
        cid = int(self.cluster_of[device_id])
        return cid if cid >= 0 else None

    def register(self, device_id: int) -> PowerReleased:
        return PowerReleased(float(self.value[device_id]), float(self.set_at[device_id]))

    def _live_registers(self) -> Dict[int, Tuple[float, float]]:
        """{device_id: (value, set_at)} for every non-zero register."""
        return {j: (float(self.value[j]), at) for j, at in sorted(self._live.items())}

    def record_switch(
        self, device_id: int, direction: Direction, now: float, *, power: float = 1.0
    ) -> None:
        value = -power if direction is Direction.ON else power
        self.value[device_id] = value
        self.set_at[device_id] = now
        self._live[device_id] = now

    def expire(self, now: float) -> None:
        if not self._live:
            return
        T = self.window_T
        for j in [j for j, at in self._live.items() if now - at > T]:
            self.value[j] = 0.0
            del self._live[j]

    def search_order(self, cluster_id: int) -> np.ndarray:
        """Fresh random permutation of the cluster (id order when no rng is attached)."""
        members = self._members[cluster_id]
        if self._rng is None:
            return members
        return self._rng.permutation(members)

    def _has_provider(self, cluster_id: int, sign: float, searcher: Optional[int]) -> bool:
        for j in self._live:
            if j != searcher and self.cluster_of[j] == cluster_id and self.value[j] * sign > 0:
                return True
        return False

    def _matching(
        self,
        cluster_id: int,
        sign: float,
        searcher: Optional[int],
        search_order: Optional[Sequence[int]],
        min_abs: float = 0.0,
    ) -> Optional[int]:
        if not self.enabled or self.window_T <= 0.0:
            return None
        if search_order is None:
            if not self._has_provider(cluster_id, sign, searcher):
                return None
            search_order = self.search_order(cluster_id)
        order = np.asarray(search_order, dtype=np.int64)
        if order.size == 0:
            return None
        vals = self.value[order] * sign
        mask = (vals > 0) & (self.cluster_of[order] == cluster_id)
        if min_abs > 0.0:
            mask &= vals >= min_abs - _POWER_TOL
        if searcher is not None:
            mask &= order != searcher
        hits = np.flatnonzero(mask)
        if hits.size == 0:
            return None
        return int(order[hits[0]])

    def find_and_consume(
        self,
        cluster_id: int,
        desired: Direction,
        *,
        searcher: Optional[int] = None,
        search_order: Optional[Sequence[int]] = None,
    ) -> Optional[int]:
        """Consume the first opposite-switch slot along ``search_order``.

        Wanting ON looks for a +1 register, wanting OFF for a −1 register. The provider's
        register is reset to 0; the caller records its own switch afterwards.
        """
        sign = 1.0 if desired is Direction.ON else -1.0
        k = self._matching(cluster_id, sign, searcher, search_order)
        if k is None:
            return None
        self.value[k] = 0.0
        self._live.pop(k, None)
        logger.debug("device %s consumed slot of %s in cluster %d", searcher, k, cluster_id)
        return k

    def find_and_consume_power(
        self,
        cluster_id: int,
        needed: float,
        *,
        searcher: Optional[int] = None,
        search_order: Optional[Sequence[int]] = None,
    ) -> Optional[int]:
        """Variable-power variant: a single provider must cover the whole need.

        ``needed`` is positive for a device wanting to switch ON (it draws on power
        released by OFF switches) and negative for one wanting OFF. The provider's stored
        amount is decremented by ``needed``.
        """
        if needed == 0:
            return None
        sign = 1.0 if needed > 0 else -1.0
        k = self._matching(cluster_id, sign, searcher, search_order, min_abs=abs(needed))
        if k is None:
            return None
        rest = float(self.value[k]) - needed
        if abs(rest) <= _POWER_TOL:
            self.value[k] = 0.0
            self._live.pop(k, None)
        else:
            self.value[k] = rest
        return k
