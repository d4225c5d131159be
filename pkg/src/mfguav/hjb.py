"""Value-function learning: optimal action extraction, HJB residuals in
neighbor and mean-field form, and the normalized-gradient weight update.

The optimal action is a* = -(1/(2 c3)) B^T grad(psi). Note the minus sign:
it is the minimizer of the convex Hamiltonian and is the only sign
consistent with the -(1/(4 c3)) B B^T grad(psi) drift of the residual.
"""

from __future__ import annotations

import numpy as np

from .cost import CostParams, global_cost_mf, global_cost_neighbors, local_cost
from .dynamics import UavState, WindModel, nominal_derivative
from .errors import TrainingDivergenceError
from .models import (
    DensityModel,
    EmpiricalDensity,
    IntegrationDomain,
    TrainConfig,
    UpdateRecord,
    ValueModel,
)

# velocity block of the state vector (columns selected by B^T)
_V = slice(2, 4)


def value(m: ValueModel, s: UavState) -> float:
    return m.value(s)


def optimal_action(m: ValueModel, s: UavState, p: CostParams) -> np.ndarray:
    """a* = -(1/(2 c3)) (d psi/d vx, d psi/d vy)."""
    if not p.c3 > 0:
        raise ValueError("c3 must be positive for the action formula")
    g = m.gradient(s)
    return -g[_V] / (2.0 * p.c3)


def _trace_term(m: ValueModel, s: UavState, w: WindModel) -> float:
    """(1/2) tr(G G^T hess(psi)); only the velocity block of the Hessian
    enters because G = [[0], [V_o]]."""
    H = m.hessian(s)
    VV = w.V_o @ w.V_o.T
    return 0.5 * float(np.sum(VV * H[_V, _V]))


def _residual_core(m: ValueModel, s: UavState, w: WindModel, p: CostParams) -> float:
    """All residual terms except the global (flocking) cost."""
    g = m.gradient(s)
    a_star = -g[_V] / (2.0 * p.c3)
    ds_dt = nominal_derivative(s, a_star, w)
    dt_psi = float(ds_dt @ g)
    # drift with the optimizing action substituted: A s - (1/(4 c3)) B B^T g + c0 B v_o
    drift = np.concatenate([s.v, -w.c0 * s.v - g[_V] / (4.0 * p.c3) + w.c0 * w.v_o])
    return dt_psi + float(drift @ g) + _trace_term(m, s, w) + local_cost(s, a_star, p)


def hjb_residual_neighbors(
    m: ValueModel, s: UavState, neighbors, w: WindModel, p: CostParams
) -> float:
    return _residual_core(m, s, w, p) + p.c4 * global_cost_neighbors(s, neighbors, p)


def hjb_residual_mf(
    m: ValueModel,
    s: UavState,
    density,
    domain: IntegrationDomain | None,
    w: WindModel,
    p: CostParams,
) -> float:
    return _residual_core(m, s, w, p) + p.c4 * global_cost_mf(s, density, domain, p)


def residual_weight_gradient(
    m: ValueModel, s: UavState, w: WindModel, p: CostParams
) -> np.ndarray:
    """Analytic gradient of the HJB residual with respect to the weights.

    With g = J^T w the residual is 2 L . g - |g_v|^2 / (2 c3) + tau . w
    plus weight-independent cost terms, where L = A s + c0 B v_o and
    tau_m = (1/2) tr(G G^T hess(term m)).
    """
    sv = s.as_vector()
    J = m.basis.feature_jacobian(sv)
    L = np.concatenate([s.v, -w.c0 * s.v + w.c0 * w.v_o])
    VV = w.V_o @ w.V_o.T
    Hf = m.basis.feature_hessians(sv)
    tau = 0.5 * np.einsum("jk,mjk->m", VV, Hf[:, _V, _V])
    g_v = J[:, _V].T @ m.weights
    return 2.0 * (J @ L) + tau - (J[:, _V] @ g_v) / p.c3


def regularizer_value_and_gradient(
    m: ValueModel, s: UavState, w: WindModel, p: CostParams
) -> tuple[float, np.ndarray]:
    """R = max{0, s . ds/dt} under the current candidate action a*(w), and
    its weight gradient. Off the active branch (including the kink) the
    gradient is 0."""
    sv = s.as_vector()
    J = m.basis.feature_jacobian(sv)
    g = J.T @ m.weights
    a_star = -g[_V] / (2.0 * p.c3)
    ds_dt = nominal_derivative(s, a_star, w)
    r_val = float(sv @ ds_dt)
    if r_val > 0.0:
        # dR/dw = (B^T s) . da*/dw = -(1/(2 c3)) J_v v
        grad = -(J[:, _V] @ s.v) / (2.0 * p.c3)
        return r_val, grad
    return 0.0, np.zeros(len(m.basis))


def _normalized(g: np.ndarray, mu: float) -> np.ndarray:
    n = np.linalg.norm(g)
    if n == 0.0:
        return np.zeros_like(g)
    return mu * g / n


def ngd_update(
    m: ValueModel,
    s: UavState,
    context,
    w: WindModel,
    p: CostParams,
    t: TrainConfig,
) -> tuple[ValueModel, UpdateRecord]:
    """One normalized-gradient step on the loss l = (1/2) residual^2, plus
    the (unnormalized) regularizer gradient term.

    ``context`` carries the global-cost information: a list of neighbor
    states, an EmpiricalDensity, or a (DensityModel, domain-or-None) pair /
    bare DensityModel.
    """
    # divergence shows up as inf/nan and is reported explicitly below
    with np.errstate(over="ignore", invalid="ignore"):
        if isinstance(context, (list, tuple)) and (
            len(context) == 0 or isinstance(context[0], UavState)
        ):
            residual = hjb_residual_neighbors(m, s, list(context), w, p)
        elif isinstance(context, (EmpiricalDensity, DensityModel)):
            residual = hjb_residual_mf(m, s, context, None, w, p)
        else:
            density, domain = context
            residual = hjb_residual_mf(m, s, density, domain, w, p)

        grad_loss = residual * residual_weight_gradient(m, s, w, p)
        r_val, grad_reg = regularizer_value_and_gradient(m, s, w, p)
        if not (np.all(np.isfinite(grad_loss)) and np.all(np.isfinite(grad_reg))):
            raise TrainingDivergenceError("non-finite training gradient", state=s)

        new_w = m.weights - _normalized(grad_loss, t.mu) - t.c_H * grad_reg
    record = UpdateRecord(
        loss=0.5 * residual * residual,
        regularizer_active=r_val > 0.0,
        gradient_evals=1,
    )
    return m.with_weights(new_w), record
