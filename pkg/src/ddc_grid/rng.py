"""Seeded random streams.

Streams are Philox (counter-based) generators keyed by ``(seed, key)`` through a
``SeedSequence``, so they never depend on call order elsewhere in the program.

Fleet stream, key 0: first N uniforms initialise the fleet, then every step takes a
``(2, N)`` block: row 0 is the intended-flip draw, row 1 the recovery draw, column j
belongs to device j. Device j's k-th step draws therefore sit at a fixed offset of the
stream, whatever the policy did with them. There are no per-device streams; key 0 is the
fleet stream, not device 0.

Scenario stream, key N+1: permutations for register searches.
"""
from __future__ import annotations

from typing import List, Tuple

import numpy as np

FLEET_KEY = 0

StepEvents = List[Tuple[int, float]]


def stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(key)])))


def scenario_stream(seed: int, n_devices: int) -> np.random.Generator:
    return stream(seed, n_devices + 1)


class FleetDraws:
    """Block-buffered fleet draws, handed out one step at a time.

    Almost all per-step draws are far above the event probabilities (~1e-5), so each
    block is reduced to the few (device, draw) pairs below ``flip_cut`` and
    ``recovery_cut``. Callers must pass the exact per-device thresholds downstream;
    the cuts only have to bound them from above.
    """

    def __init__(
        self,
        seed: int,
        n_devices: int,
        *,
        flip_cut: float,
        recovery_cut: float,
        block_steps: int = 1000,
    ):
        self.n_devices = int(n_devices)
        self.flip_cut = float(flip_cut)
        self.recovery_cut = float(recovery_cut)
        self.block_steps = max(1, int(block_steps))
        self._gen = stream(seed, FLEET_KEY)
        self.initial = self._gen.random(self.n_devices)
        self.consumed = 0  # per-step draws handed out so far
        self.generated = self.n_devices  # uniforms taken from the generator
        self._flips: List[StepEvents] = []
        self._recoveries: List[StepEvents] = []
        self._pos = 0

    def _refill(self, steps: int) -> None:
        block = self._gen.random((steps, 2, self.n_devices))
        self.generated += block.size
        self._flips = self._sparse(block[:, 0, :], self.flip_cut, steps)
        self._recoveries = self._sparse(block[:, 1, :], self.recovery_cut, steps)
        self._pos = 0

    @staticmethod
    def _sparse(rows: np.ndarray, cut: float, steps: int) -> List[StepEvents]:
        # np.nonzero walks in C order: by step, then ascending device id
        step_idx, dev_idx = np.nonzero(rows < cut)
        vals = rows[step_idx, dev_idx]
        bounds = np.searchsorted(step_idx, np.arange(steps + 1))
        devs = dev_idx.tolist()
        us = vals.tolist()
        return [
            list(zip(devs[bounds[k] : bounds[k + 1]], us[bounds[k] : bounds[k + 1]]))
            for k in range(steps)
        ]

    def next_step(self, remaining: int) -> Tuple[StepEvents, StepEvents]:
        """Candidate (device, draw) pairs for the flip and recovery slots of one step.

        ``remaining`` (steps left in the run, this one included) caps the block size so
        the stream is never drawn past the end of the run.
        """
        if self._pos >= len(self._flips):
            self._refill(min(self.block_steps, max(1, int(remaining))))
        k = self._pos
        self._pos += 1
        self.consumed += 2 * self.n_devices
        return self._flips[k], self._recoveries[k]
