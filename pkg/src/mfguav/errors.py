"""Package exception types."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class TrainingDivergenceError(RuntimeError):
    """Raised when a weight update encounters a non-finite gradient.

    Carries the offending state so the engine can freeze and flag the UAV.
    """

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state
