"""Cost functionals: local running cost, neighbor-averaged flocking cost,
its mean-field integral form, and the terminal-stabilization regularizer."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import UavState
from .models import DensityModel, EmpiricalDensity, IntegrationDomain


@dataclass
class CostParams:
    c1: float = 100.0
    c2: float = 1.5
    c3: float = 1.5
    c4: float = 0.5
    beta: float = 1.0
    eps: float = 0.001
    r_singularity_tol: float = 1e-6

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4", "beta", "eps", "r_singularity_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"cost parameter {name} must be positive")


def local_cost(s: UavState, a, p: CostParams) -> float:
    """v.r/|r| + c1 |r|^2 + c2 |v|^2 + c3 |a|^2.

    The projected-velocity term is defined as 0 below the singularity
    tolerance (at the destination the term is moot).
    """
    a = np.asarray(a, dtype=float).reshape(2)
    rn = np.linalg.norm(s.r)
    proj = 0.0 if rn < p.r_singularity_tol else float(s.v @ s.r) / rn
    return (
        proj
        + p.c1 * float(s.r @ s.r)
        + p.c2 * float(s.v @ s.v)
        + p.c3 * float(a @ a)
    )


def _pair_kernel(dv: np.ndarray, dr: np.ndarray, p: CostParams) -> float:
    return float(dv @ dv) / (p.eps + float(dr @ dr)) ** p.beta


def global_cost_neighbors(s_i: UavState, neighbors, p: CostParams) -> float:
    """Average Cucker-Smale kernel over the neighbor list; 0 if empty."""
    if len(neighbors) == 0:
        return 0.0
    total = 0.0
    for s_j in neighbors:
        total += _pair_kernel(s_j.v - s_i.v, s_j.r - s_i.r, p)
    return total / len(neighbors)


def global_cost_mf(
    s_i: UavState,
    density,
    domain: IntegrationDomain | None,
    p: CostParams,
) -> float:
    """Mean-field flocking cost: integral of m(s) |v - v_i|^2 /
    (eps + |r - r_i|^2)^beta over the domain.

    ``density`` is a DensityModel (midpoint-rule quadrature, negative values
    clipped to 0 and the clipped mass renormalized to 1) or an
    EmpiricalDensity (exact discrete average).
    """
    if isinstance(density, EmpiricalDensity):
        # exact discrete average over the sample set
        S = np.stack([s.as_vector() for s in density.states])
        dv = S[:, 2:] - s_i.v
        dr = S[:, :2] - s_i.r
        kernel = (dv * dv).sum(axis=1) / (p.eps + (dr * dr).sum(axis=1)) ** p.beta
        return float(kernel.mean())

    if domain is None:
        domain = density.domain
    nodes = domain.nodes
    if domain is density.domain:
        m_vals = density.density_at_nodes()
    else:
        m_vals = density.basis.features_batch(nodes) @ density.weights
    m_clip = np.maximum(m_vals, 0.0)
    mass = m_clip.sum()
    if mass == 0.0:
        warnings.warn("density has zero mass after clipping; mean-field cost is 0")
        return 0.0
    dv = nodes[:, 2:] - s_i.v
    dr = nodes[:, :2] - s_i.r
    kernel = (dv * dv).sum(axis=1) / (p.eps + (dr * dr).sum(axis=1)) ** p.beta
    return float((m_clip * kernel).sum() / mass)


def regularizer(s: UavState, ds_dt) -> float:
    """Hinge penalty max{0, s . ds/dt} promoting terminal zero-state
    convergence."""
    ds_dt = np.asarray(ds_dt, dtype=float).reshape(4)
    return max(0.0, float(s.as_vector() @ ds_dt))
