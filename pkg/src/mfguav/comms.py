"""SNR-derived communication range, neighborhood discovery, and message
accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import UavState


@dataclass
class CommsConfig:
    """Transmit power P and noise power sigma^2 in mW, SNR threshold theta
    as a linear ratio, path-loss exponent alpha >= 2."""

    tx_power: float = 10.0
    noise_power: float = 1e-2
    snr_threshold: float = 0.1
    path_loss_exp: float = 2.0

    def __post_init__(self):
        for name in ("tx_power", "noise_power", "snr_threshold", "path_loss_exp"):
            if not getattr(self, name) > 0:
                raise ValueError(f"comms parameter {name} must be positive")
        if self.path_loss_exp < 2:
            raise ValueError("path_loss_exp must be at least 2")


def snr_db_to_linear(theta_db: float) -> float:
    return 10.0 ** (theta_db / 10.0)


def comm_range(c: CommsConfig) -> float:
    """d = [P / (theta sigma^2)]^(1/alpha)."""
    return float(
        (c.tx_power / (c.snr_threshold * c.noise_power)) ** (1.0 / c.path_loss_exp)
    )


def neighbors(states: list[UavState], i: int, d: float) -> list[int]:
    """Indices j != i with |r_j - r_i| <= d."""
    if not 0 <= i < len(states):
        raise IndexError(f"UAV index {i} out of range for {len(states)} states")
    r_i = states[i].r
    out = []
    for j, s in enumerate(states):
        if j != i and np.linalg.norm(s.r - r_i) <= d:
            out.append(j)
    return out


@dataclass
class CountLedger:
    """Per-step event counts with a running total. Used for state-exchange
    and gradient-evaluation accounting."""

    per_step: list[int] = field(default_factory=list)
    total: int = 0

    def new_step(self):
        self.per_step.append(0)

    def record(self, n: int):
        if n < 0:
            raise ValueError("count must be non-negative")
        if not self.per_step:
            self.per_step.append(0)
        self.per_step[-1] += n
        self.total += n


# the state-exchange ledger is a plain count ledger
ExchangeLedger = CountLedger


def record_exchange(ledger: CountLedger, n_messages: int) -> CountLedger:
    """Add n directed state messages to the current step's count."""
    ledger.record(n_messages)
    return ledger
