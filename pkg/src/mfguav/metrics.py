"""Post-processing: collision counting, energy proxies, and the cumulative
regularizer-activation series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import UavState
from .engine import RunLog

COLLISION_THRESHOLD = 0.1  # meters


@dataclass(frozen=True)
class CollisionRecord:
    step: int
    i: int
    j: int
    distance: float


@dataclass
class EnergySummary:
    """Proxy energies: directed message count, gradient-evaluation count,
    and the Riemann sum of |v|^2 + |a|^2 over the run."""

    communication: int
    computation: int
    motion: float

    def ratios(self, reference: "EnergySummary") -> dict[str, float | None]:
        """Per-category ratios against a reference run; None where the
        reference count is zero."""
        out = {}
        for name in ("communication", "computation", "motion"):
            ref = getattr(reference, name)
            out[name] = None if ref == 0 else getattr(self, name) / ref
        return out


def count_collisions(
    states: list[UavState], threshold: float = COLLISION_THRESHOLD, step: int = 0
) -> list[CollisionRecord]:
    """All unordered pairs strictly closer than the threshold."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    records = []
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            d = float(np.linalg.norm(states[j].r - states[i].r))
            if d < threshold:
                records.append(CollisionRecord(step=step, i=i, j=j, distance=d))
    return records


def energy_summary(log: RunLog, reference: RunLog | None = None):
    """Aggregate the three proxies from a run log. With a reference log,
    also return the per-category ratios (reference horizons must match)."""
    motion = 0.0
    for row in log.rows:
        if row.step < log.steps_run:  # control rows only, not the terminal row
            motion += (
                row.vx**2 + row.vy**2 + row.ax**2 + row.ay**2
            ) * log.dt
    summary = EnergySummary(
        communication=log.exchange_ledger.total,
        computation=log.gradient_ledger.total,
        motion=motion,
    )
    if reference is None:
        return summary
    if reference.steps_run != log.steps_run:
        raise ValueError("cannot compare runs with different horizons")
    return summary, summary.ratios(energy_summary(reference))


def regularizer_series(log: RunLog) -> np.ndarray:
    """Cumulative activation count per step, over all UAVs. Length is
    steps_run + 1 (index 0 covers the control at t = 0)."""
    per_step = np.zeros(log.steps_run + 1, dtype=int)
    for row in log.rows:
        if row.reg_active:
            per_step[row.step] += 1
    return np.cumsum(per_step)
