from __future__ import annotations

from typing import Optional


class GridSimError(Exception):
    """Base user-facing error for ddc_grid.

    Use this for predictable, actionable failures (bad config, diverging plant, etc.).
    CLI will catch this and print a one-line message without a traceback.
    """


class ConfigError(GridSimError):
    """Scenario configuration violates the schema or an invariant."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class IntegrationError(GridSimError):
    """Plant integration produced a non-physical frequency."""

    def __init__(self, message: str, *, t: Optional[float] = None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t:.2f} s)")


class PresetError(GridSimError):
    """Unknown scenario preset."""


class SweepError(GridSimError):
    """Unknown or unsupported sweep parameter."""
