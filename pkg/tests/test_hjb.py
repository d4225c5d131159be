import numpy as np
import pytest

from mfguav.basis import IVX, IVY, Monomial, PolynomialBasis, build_basis
from mfguav.cost import CostParams, global_cost_neighbors, local_cost
from mfguav.dynamics import UavState, WindModel, system_matrices
from mfguav.errors import TrainingDivergenceError
from mfguav.hjb import (
    _trace_term,
    hjb_residual_mf,
    hjb_residual_neighbors,
    ngd_update,
    optimal_action,
    regularizer_value_and_gradient,
    residual_weight_gradient,
)
from mfguav.models import EmpiricalDensity, TrainConfig, ValueModel

RNG = np.random.default_rng(99)


def make_wind(c0=0.1, v_o=(1.0, -1.0), sigma=0.1):
    return WindModel(c0=c0, v_o=np.array(v_o), V_o=sigma * np.eye(2))


def random_state(scale=2.0):
    return UavState(r=RNG.uniform(-scale, scale, 2), v=RNG.uniform(-scale, scale, 2))


def random_model(basis=None):
    basis = basis or build_basis("hjb")
    return ValueModel(basis=basis, weights=RNG.normal(scale=0.3, size=len(basis)))


def test_optimal_action_hand_case():
    # psi = 3 vx - 6 vy, c3 = 1.5  =>  a* = -(3, -6) / 3 = (-1, 2)
    basis = PolynomialBasis(
        [Monomial((0, 0, 1, 0), 1.0), Monomial((0, 0, 0, 1), 1.0)], kind="test"
    )
    weights = np.array(
        [3.0 if m.exponents == (0, 0, 1, 0) else -6.0 for m in basis.terms]
    )
    m = ValueModel(basis=basis, weights=weights)
    a = optimal_action(m, UavState(r=[5, 5], v=[1, 1]), CostParams(c3=1.5))
    assert np.allclose(a, [-1.0, 2.0])


def test_optimal_action_ignores_position_gradient():
    basis = PolynomialBasis(
        [Monomial((1, 0, 0, 0), 1.0), Monomial((0, 1, 0, 0), 1.0)], kind="test"
    )
    m = ValueModel(basis=basis, weights=np.array([10.0, -4.0]))
    a = optimal_action(m, random_state(), CostParams())
    assert np.array_equal(a, [0.0, 0.0])


def test_optimal_action_linear_in_weights():
    m = random_model()
    s = random_state()
    p = CostParams()
    a1 = optimal_action(m, s, p)
    a2 = optimal_action(m.with_weights(3.0 * m.weights), s, p)
    assert np.allclose(a2, 3.0 * a1)


def test_zero_weights_residual_is_running_cost():
    # with psi = 0 the action is 0 and only the cost terms survive
    basis = build_basis("hjb")
    m = ValueModel(basis=basis, weights=np.zeros(len(basis)))
    w = make_wind()
    p = CostParams()
    s = UavState(r=[3.0, 4.0], v=[0.0, 0.0])
    assert hjb_residual_neighbors(m, s, [], w, p) == pytest.approx(2500.0)
    nbr = UavState(r=[3.0, 5.0], v=[1.0, 0.0])
    expected = 2500.0 + p.c4 * global_cost_neighbors(s, [nbr], p)
    assert hjb_residual_neighbors(m, s, [nbr], w, p) == pytest.approx(expected)


def straight_line_residual(m, s, nbrs, w, p):
    """Independent evaluator built directly from the state-space matrices."""
    mats = system_matrices(w)
    g = m.gradient(s)
    a_star = -(mats.B.T @ g) / (2.0 * p.c3)
    sdot = mats.A @ s.as_vector() + mats.B @ (a_star + w.c0 * w.v_o)
    dt_psi = sdot @ g
    drift = (
        mats.A @ s.as_vector()
        - (mats.B @ mats.B.T @ g) / (4.0 * p.c3)
        + w.c0 * (mats.B @ w.v_o)
    )
    GG = mats.G @ mats.G.T
    trace = 0.5 * np.trace(GG @ m.hessian(s))
    return (
        dt_psi
        + drift @ g
        + trace
        + local_cost(s, a_star, p)
        + p.c4 * global_cost_neighbors(s, nbrs, p)
    )


def test_residual_matches_matrix_form_evaluator():
    w = make_wind()
    p = CostParams()
    for _ in range(30):
        m = random_model()
        s = random_state()
        nbrs = [random_state() for _ in range(int(RNG.integers(0, 4)))]
        got = hjb_residual_neighbors(m, s, nbrs, w, p)
        want = straight_line_residual(m, s, nbrs, w, p)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


def test_mf_and_neighbor_residuals_agree_on_empirical_measure():
    w = make_wind()
    p = CostParams()
    for _ in range(25):
        m = random_model()
        s = random_state()
        others = [random_state() for _ in range(int(RNG.integers(1, 10)))]
        nb = hjb_residual_neighbors(m, s, others, w, p)
        mf = hjb_residual_mf(m, s, EmpiricalDensity(others), None, w, p)
        assert mf == pytest.approx(nb, rel=1e-9)


def test_trace_term_zero_for_velocity_affine_weights():
    basis = build_basis("hjb")
    w = make_wind(sigma=0.7)
    mask = np.array([m.exponents[IVX] + m.exponents[IVY] <= 1 for m in basis.terms])
    weights = np.where(mask, RNG.normal(size=len(basis)), 0.0)
    m = ValueModel(basis=basis, weights=weights)
    for _ in range(5):
        assert _trace_term(m, random_state(), w) == 0.0


def test_residual_weight_gradient_matches_finite_differences():
    w = make_wind()
    p = CostParams()
    h = 1e-6
    for _ in range(10):
        m = random_model()
        s = random_state()
        nbrs = [random_state() for _ in range(3)]
        grad = residual_weight_gradient(m, s, w, p)
        fd = np.zeros_like(grad)
        for k in range(len(grad)):
            e = np.zeros_like(m.weights)
            e[k] = h
            fd[k] = (
                hjb_residual_neighbors(m.with_weights(m.weights + e), s, nbrs, w, p)
                - hjb_residual_neighbors(m.with_weights(m.weights - e), s, nbrs, w, p)
            ) / (2 * h)
        scale = max(1.0, np.abs(fd).max())
        assert np.abs(grad - fd).max() <= 1e-5 * scale


def test_loss_gradient_matches_finite_differences():
    w = make_wind()
    p = CostParams()
    h = 1e-7
    for _ in range(5):
        m = random_model()
        s = random_state()
        nbrs = [random_state() for _ in range(2)]

        def loss(weights):
            r = hjb_residual_neighbors(m.with_weights(weights), s, nbrs, w, p)
            return 0.5 * r * r

        res = hjb_residual_neighbors(m, s, nbrs, w, p)
        grad = res * residual_weight_gradient(m, s, w, p)
        fd = np.zeros_like(grad)
        for k in range(len(grad)):
            e = np.zeros_like(m.weights)
            e[k] = h
            fd[k] = (loss(m.weights + e) - loss(m.weights - e)) / (2 * h)
        scale = max(1.0, np.abs(fd).max())
        assert np.abs(grad - fd).max() <= 1e-5 * scale


def test_regularizer_gradient_matches_finite_differences():
    w = make_wind()
    p = CostParams()
    h = 1e-7
    checked = 0
    for _ in range(40):
        m = random_model()
        s = random_state()
        r_val, grad = regularizer_value_and_gradient(m, s, w, p)
        if r_val <= 1e-3:  # stay away from the hinge kink
            continue
        checked += 1
        fd = np.zeros_like(grad)
        for k in range(len(grad)):
            e = np.zeros_like(m.weights)
            e[k] = h
            rp, _ = regularizer_value_and_gradient(m.with_weights(m.weights + e), s, w, p)
            rm, _ = regularizer_value_and_gradient(m.with_weights(m.weights - e), s, w, p)
            fd[k] = (rp - rm) / (2 * h)
        scale = max(1.0, np.abs(fd).max())
        assert np.abs(grad - fd).max() <= 1e-5 * scale
    assert checked >= 5


def test_regularizer_inactive_branch_has_zero_gradient():
    # at the destination with zero velocity s . ds/dt = 0: inactive
    basis = build_basis("hjb")
    m = ValueModel(basis=basis, weights=np.zeros(len(basis)))
    r_val, grad = regularizer_value_and_gradient(
        m, UavState(r=[0, 0], v=[0, 0]), make_wind(), CostParams()
    )
    assert r_val == 0.0
    assert np.all(grad == 0.0)


def test_ngd_fixed_point_at_destination_without_wind():
    w = WindModel(c0=0.1, v_o=[0.0, 0.0], V_o=np.zeros((2, 2)))
    basis = build_basis("hjb")
    m = ValueModel(basis=basis, weights=np.zeros(len(basis)))
    s = UavState(r=[0, 0], v=[0, 0])
    new, rec = ngd_update(m, s, [], w, CostParams(), TrainConfig())
    assert np.array_equal(new.weights, m.weights)
    assert rec.loss == 0.0
    assert not rec.regularizer_active


def test_ngd_step_has_norm_mu_when_regularizer_off():
    w = make_wind()
    p = CostParams()
    t = TrainConfig(mu=0.01, c_H=0.0)
    for _ in range(5):
        m = random_model()
        s = random_state()
        new, rec = ngd_update(m, s, [random_state()], w, p, t)
        assert np.linalg.norm(new.weights - m.weights) == pytest.approx(t.mu, rel=1e-12)
        assert rec.gradient_evals == 1
        assert rec.loss >= 0.0


def test_ngd_adds_unnormalized_regularizer_term():
    w = make_wind()
    p = CostParams()
    m = random_model()
    s = UavState(r=[10.0, 0.0], v=[5.0, 0.0])  # moving away: hinge likely active
    base, _ = ngd_update(m, s, [], w, p, TrainConfig(mu=0.01, c_H=0.0))
    full, rec = ngd_update(m, s, [], w, p, TrainConfig(mu=0.01, c_H=0.5))
    _, grad_reg = regularizer_value_and_gradient(m, s, w, p)
    assert rec.regularizer_active
    assert np.allclose(full.weights, base.weights - 0.5 * grad_reg)


def test_ngd_raises_on_nonfinite_gradient():
    basis = build_basis("hjb")
    m = ValueModel(basis=basis, weights=np.full(len(basis), 1e200))
    with pytest.raises(TrainingDivergenceError):
        ngd_update(
            m, UavState(r=[150, 100], v=[1, -1]), [], make_wind(), CostParams(),
            TrainConfig(),
        )


def test_action_requires_positive_c3():
    m = random_model()
    p = CostParams()
    p.c3 = 0.0  # bypass constructor check to exercise the guard
    with pytest.raises(ValueError):
        optimal_action(m, random_state(), p)
