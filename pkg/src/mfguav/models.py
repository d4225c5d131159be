"""Shared model and domain types: value model, density model, integration
domain, empirical measures, and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import PolynomialBasis
from .dynamics import UavState


class IntegrationDomain:
    """Bounded 4-D box with a midpoint-rule tensor quadrature grid."""

    def __init__(self, lower, upper, points_per_axis: int = 9):
        self.lower = np.asarray(lower, dtype=float).reshape(4)
        self.upper = np.asarray(upper, dtype=float).reshape(4)
        if not np.all(self.lower < self.upper):
            raise ValueError("domain lower bounds must be strictly below upper bounds")
        if points_per_axis < 1:
            raise ValueError("points_per_axis must be positive")
        self.points_per_axis = int(points_per_axis)
        self._nodes = None
        self._feature_cache: dict[int, np.ndarray] = {}

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.widths / self.points_per_axis))

    @property
    def nodes(self) -> np.ndarray:
        """Midpoint quadrature nodes, shape (points_per_axis**4, 4)."""
        if self._nodes is None:
            n = self.points_per_axis
            axes = [
                self.lower[j] + (np.arange(n) + 0.5) * self.widths[j] / n
                for j in range(4)
            ]
            grids = np.meshgrid(*axes, indexing="ij")
            self._nodes = np.stack([g.ravel() for g in grids], axis=1)
        return self._nodes

    def node_features(self, basis: PolynomialBasis) -> np.ndarray:
        """Basis features at every quadrature node, cached per basis."""
        key = id(basis)
        if key not in self._feature_cache:
            self._feature_cache[key] = basis.features_batch(self.nodes)
        return self._feature_cache[key]

    def contains(self, s: np.ndarray) -> bool:
        s = np.asarray(s, dtype=float).reshape(4)
        return bool(np.all(s >= self.lower) and np.all(s <= self.upper))

    def __eq__(self, other):
        if not isinstance(other, IntegrationDomain):
            return NotImplemented
        return (
            np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and self.points_per_axis == other.points_per_axis
        )

    def __repr__(self):
        return (
            f"IntegrationDomain(lower={self.lower.tolist()}, "
            f"upper={self.upper.tolist()}, points_per_axis={self.points_per_axis})"
        )


def _check_lengths(basis: PolynomialBasis, weights) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(basis),):
        raise ValueError(
            f"weight vector length {weights.shape} does not match basis size "
            f"{len(basis)}"
        )
    return weights


@dataclass
class ValueModel:
    """Linear-in-weights value function w . sigma_H(s)."""

    basis: PolynomialBasis
    weights: np.ndarray

    def __post_init__(self):
        self.weights = _check_lengths(self.basis, self.weights)

    def value(self, s: UavState) -> float:
        return float(self.weights @ self.basis.features(s.as_vector()))

    def gradient(self, s: UavState) -> np.ndarray:
        return self.basis.gradient(self.weights, s.as_vector())

    def hessian(self, s: UavState) -> np.ndarray:
        return self.basis.hessian(self.weights, s.as_vector())

    def with_weights(self, weights) -> "ValueModel":
        return ValueModel(basis=self.basis, weights=weights)


@dataclass
class DensityModel:
    """Linear-in-weights density surrogate w . sigma_F(s) over a bounded
    domain. Raw values may be negative; consumers clip where needed."""

    basis: PolynomialBasis
    weights: np.ndarray
    domain: IntegrationDomain

    def __post_init__(self):
        self.weights = _check_lengths(self.basis, self.weights)

    def density(self, s: UavState) -> float:
        return float(self.weights @ self.basis.features(s.as_vector()))

    def density_at_nodes(self) -> np.ndarray:
        return self.domain.node_features(self.basis) @ self.weights

    def gradient(self, s: UavState) -> np.ndarray:
        return self.basis.gradient(self.weights, s.as_vector())

    def hessian(self, s: UavState) -> np.ndarray:
        return self.basis.hessian(self.weights, s.as_vector())

    def with_weights(self, weights) -> "DensityModel":
        return DensityModel(basis=self.basis, weights=weights, domain=self.domain)


@dataclass
class EmpiricalDensity:
    """Discrete empirical measure (1/N) sum of point masses at the given
    states. Used as an alternative density in mean-field cost terms."""

    states: list[UavState]

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValueError("empirical density needs at least one state")


@dataclass
class TrainConfig:
    """Normalized-gradient-descent settings."""

    mu: float = 0.01
    c_H: float = 0.5
    grad_fd_step: float = 1e-6

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("step size mu must be positive")
        if self.c_H < 0:
            raise ValueError("regularizer weight c_H must be non-negative")


@dataclass
class UpdateRecord:
    """Bookkeeping emitted by one training update."""

    loss: float
    regularizer_active: bool = False
    gradient_evals: int = 1
