"""UAV state, Ornstein-Uhlenbeck wind model, and state propagation.

State vector convention: s = (x, y, vx, vy), i.e. s = [r; v].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class UavState:
    """Position r (m) and velocity v (m/s) of a single UAV."""

    r: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).reshape(2))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(2))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.r, self.v])

    @staticmethod
    def from_vector(s) -> "UavState":
        s = np.asarray(s, dtype=float).reshape(4)
        return UavState(r=s[:2], v=s[2:])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.v)))


@dataclass
class WindModel:
    """Mean-reverting (OU) wind: drag c0 > 0, mean velocity v_o,
    covariance factor V_o (2x2)."""

    c0: float = 0.1
    v_o: np.ndarray = field(default_factory=lambda: np.array([1.0, -1.0]))
    V_o: np.ndarray = field(default_factory=lambda: 0.1 * np.eye(2))

    def __post_init__(self):
        self.v_o = np.asarray(self.v_o, dtype=float).reshape(2)
        self.V_o = np.asarray(self.V_o, dtype=float).reshape(2, 2)
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not np.all(np.isfinite(self.V_o)):
            raise ValueError("V_o entries must be finite")

    def __eq__(self, other):
        if not isinstance(other, WindModel):
            return NotImplemented
        return (
            self.c0 == other.c0
            and np.array_equal(self.v_o, other.v_o)
            and np.array_equal(self.V_o, other.V_o)
        )


@dataclass(frozen=True)
class SystemMatrices:
    """Constant state-space matrices A (4x4), B (4x2), G (4x2)."""

    A: np.ndarray
    B: np.ndarray
    G: np.ndarray


def system_matrices(w: WindModel) -> SystemMatrices:
    """A = [[0, I], [0, -c0 I]], B = [[0], [I]], G = [[0], [V_o]]."""
    Z = np.zeros((2, 2))
    I = np.eye(2)
    A = np.block([[Z, I], [Z, -w.c0 * I]])
    B = np.vstack([Z, I])
    G = np.vstack([Z, w.V_o])
    return SystemMatrices(A=A, B=B, G=G)


def nominal_derivative(s: UavState, a, w: WindModel) -> np.ndarray:
    """Drift ds/dt = [v; a - c0 (v - v_o)] with the noise switched off.

    Evaluated as (-c0 v) + (a + c0 v_o) so it is bitwise identical to
    A s + B (a + c0 v_o) with the SystemMatrices blocks.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    return np.concatenate([s.v, -w.c0 * s.v + (a + w.c0 * w.v_o)])


def step(s: UavState, a, w: WindModel, dt: float, rng: np.random.Generator) -> UavState:
    """One Euler-Maruyama step.

    v' = v + [a - c0 (v - v_o)] dt + V_o xi sqrt(dt), xi ~ N(0, I_2);
    r' = r + v dt (position uses the pre-update velocity).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    deriv = nominal_derivative(s, a, w)
    xi = rng.standard_normal(2)
    v_new = s.v + deriv[2:] * dt + w.V_o @ xi * np.sqrt(dt)
    r_new = s.r + s.v * dt
    return UavState(r=r_new, v=v_new)
