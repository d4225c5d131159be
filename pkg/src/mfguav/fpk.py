"""Density-model learning: transport residual, its normalized-gradient
update, and least-squares fitting of the initial empirical distribution."""

from __future__ import annotations

import numpy as np

from .basis import PolynomialBasis
from .cost import CostParams
from .dynamics import UavState, WindModel
from .errors import TrainingDivergenceError
from .models import (
    DensityModel,
    IntegrationDomain,
    TrainConfig,
    UpdateRecord,
    ValueModel,
)

_V = slice(2, 4)

# bandwidth floor: half the inter-UAV grid spacing at the source
BANDWIDTH_FLOOR = np.sqrt(2.0) / 2.0


def density(m: DensityModel, s: UavState) -> float:
    return m.density(s)


def _check_pair(dm: DensityModel, dm_prev: DensityModel):
    if dm.basis is not dm_prev.basis and len(dm.basis) != len(dm_prev.basis):
        raise ValueError("current and previous density models use different bases")
    if dm.domain != dm_prev.domain:
        raise ValueError("current and previous density models use different domains")


def _drift_and_divergence(
    vm: ValueModel, s: UavState, w: WindModel, p: CostParams
) -> tuple[np.ndarray, float]:
    """Controlled drift D(s) = A s - (1/(2 c3)) B B^T grad(psi) + c0 B v_o
    and its (analytic) divergence."""
    g = vm.gradient(s)
    H = vm.hessian(s)
    D = np.concatenate([s.v, -w.c0 * s.v - g[_V] / (2.0 * p.c3) + w.c0 * w.v_o])
    div_D = -2.0 * w.c0 - (H[2, 2] + H[3, 3]) / (2.0 * p.c3)
    return D, div_D


def fpk_residual(
    dm: DensityModel,
    vm: ValueModel,
    s: UavState,
    w: WindModel,
    p: CostParams,
    dm_prev: DensityModel,
    dt: float,
) -> float:
    """Transport residual at s:

    d_t m + (div D) m + D . grad(m) - (1/2) tr(G G^T hess(m)),

    with d_t m the backward difference of the weight vectors over dt.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    _check_pair(dm, dm_prev)
    sv = s.as_vector()
    feats = dm.basis.features(sv)
    m_val = float(dm.weights @ feats)
    dt_m = float((dm.weights - dm_prev.weights) @ feats) / dt
    D, div_D = _drift_and_divergence(vm, s, w, p)
    grad_m = dm.basis.gradient(dm.weights, sv)
    Hm = dm.basis.hessian(dm.weights, sv)
    VV = w.V_o @ w.V_o.T
    diffusion = 0.5 * float(np.sum(VV * Hm[_V, _V]))
    return dt_m + div_D * m_val + float(D @ grad_m) - diffusion


def fpk_residual_weight_gradient(
    dm: DensityModel,
    vm: ValueModel,
    s: UavState,
    w: WindModel,
    p: CostParams,
    dt: float,
) -> np.ndarray:
    """Gradient of the residual with respect to the density weights. The
    residual is linear in them, so this is exact and w-independent."""
    sv = s.as_vector()
    feats = dm.basis.features(sv)
    J = dm.basis.feature_jacobian(sv)
    Hf = dm.basis.feature_hessians(sv)
    VV = w.V_o @ w.V_o.T
    tau = 0.5 * np.einsum("jk,mjk->m", VV, Hf[:, _V, _V])
    D, div_D = _drift_and_divergence(vm, s, w, p)
    return feats / dt + div_D * feats + J @ D - tau


def fpk_update(
    dm: DensityModel,
    vm: ValueModel,
    s: UavState,
    w: WindModel,
    p: CostParams,
    dm_prev: DensityModel,
    dt: float,
    t: TrainConfig,
) -> tuple[DensityModel, UpdateRecord]:
    """One normalized-gradient step on L_F = (1/2) residual^2."""
    with np.errstate(over="ignore", invalid="ignore"):
        residual = fpk_residual(dm, vm, s, w, p, dm_prev, dt)
        grad = residual * fpk_residual_weight_gradient(dm, vm, s, w, p, dt)
    if not np.all(np.isfinite(grad)):
        raise TrainingDivergenceError("non-finite density-model gradient", state=s)
    n = np.linalg.norm(grad)
    step = np.zeros_like(grad) if n == 0.0 else t.mu * grad / n
    record = UpdateRecord(loss=0.5 * residual * residual, gradient_evals=1)
    return dm.with_weights(dm.weights - step), record


def _kde_bandwidths(S: np.ndarray) -> np.ndarray:
    """Silverman-style per-axis bandwidth, floored to avoid degenerate
    spikes when samples coincide along an axis."""
    n = S.shape[0]
    sigma = S.std(axis=0)
    return np.maximum(1.06 * sigma * n ** (-0.2), BANDWIDTH_FLOOR)


def kde_at(points: np.ndarray, samples: np.ndarray, bandwidths: np.ndarray) -> np.ndarray:
    """Gaussian product-kernel density estimate of the samples, evaluated
    at each row of ``points``."""
    h = bandwidths
    norm = np.prod(h) * (2.0 * np.pi) ** (points.shape[1] / 2.0)
    z = (points[:, None, :] - samples[None, :, :]) / h
    return np.exp(-0.5 * (z * z).sum(axis=2)).sum(axis=1) / (samples.shape[0] * norm)


def fit_initial(
    states: list[UavState],
    basis: PolynomialBasis,
    domain: IntegrationDomain,
) -> tuple[DensityModel, float]:
    """Fit density weights to a kernel-smoothed empirical distribution.

    The empirical measure of ``states`` is smoothed with a Gaussian kernel,
    evaluated at the domain's quadrature nodes, and the weights are solved
    by least squares. Returns the model and the fit's RMS error.
    """
    if len(states) == 0:
        raise ValueError("need at least one state")
    S = np.stack([s.as_vector() for s in states])
    for k, s in enumerate(states):
        if not domain.contains(s.as_vector()):
            raise ValueError(f"state {k} lies outside the integration domain")
    target = kde_at(domain.nodes, S, _kde_bandwidths(S))
    Phi = domain.node_features(basis)
    weights, *_ = np.linalg.lstsq(Phi, target, rcond=None)
    rms = float(np.sqrt(np.mean((Phi @ weights - target) ** 2)))
    return DensityModel(basis=basis, weights=weights, domain=domain), rms
