import numpy as np
import pytest

from mfguav import comms, fpk
from mfguav.basis import build_basis
from mfguav.dynamics import UavState, WindModel
from mfguav.engine import (
    RunLog,
    Scenario,
    _SwarmRuntime,
    cfl_max_timestep,
    default_mf_domain,
    hjb_learning_step,
    init_swarm,
    make_streams,
    mfg_learning_step,
    run,
)
from mfguav.errors import ConfigError
from mfguav.models import TrainConfig, ValueModel


def small_scenario(**kw):
    defaults = dict(
        n_uavs=4,
        source_center=(1.0, -1.0),
        grid_spacing=1.0,
        max_steps=3,
        mf_points_per_axis=3,
        train=TrainConfig(mu=0.01, c_H=0.0),
    )
    defaults.update(kw)
    return Scenario(**defaults)


def build_runtime(sc: Scenario):
    rngs = make_streams(sc.seed, sc.n_uavs)
    states = init_swarm(sc, rngs)
    basis = build_basis("hjb")
    vms = [ValueModel(basis, np.zeros(len(basis))) for _ in range(sc.n_uavs)]
    dms = dprev = None
    if sc.controller == "mfg":
        fb = build_basis("fpk")
        dom = sc.mf_domain or default_mf_domain(states, sc.mf_points_per_axis)
        shared, _ = fpk.fit_initial(states, fb, dom)
        dms = [shared.with_weights(shared.weights.copy()) for _ in range(sc.n_uavs)]
        dprev = [shared.with_weights(shared.weights.copy()) for _ in range(sc.n_uavs)]
    return _SwarmRuntime(
        states=states,
        value_models=vms,
        density_models=dms,
        density_prev=dprev,
        rngs=rngs,
        frozen=[False] * sc.n_uavs,
        comm_range=comms.comm_range(sc.comms),
    )


def test_init_swarm_grid_geometry():
    sc = Scenario(n_uavs=25, source_center=(150.0, 100.0), grid_spacing=np.sqrt(2.0))
    states = init_swarm(sc)
    R = np.stack([s.r for s in states])
    assert np.allclose(R.mean(axis=0), [150.0, 100.0])
    assert R[:, 0].max() - R[:, 0].min() == pytest.approx(4 * np.sqrt(2.0))
    assert R[:, 1].max() - R[:, 1].min() == pytest.approx(4 * np.sqrt(2.0))
    # nearest-neighbor spacing equals the grid spacing
    d01 = np.linalg.norm(states[1].r - states[0].r)
    assert d01 == pytest.approx(np.sqrt(2.0))


def test_init_swarm_single_uav():
    sc = small_scenario(n_uavs=1)
    states = init_swarm(sc)
    assert len(states) == 1
    assert np.allclose(states[0].r, [1.0, -1.0])


def test_init_swarm_noiseless_velocity_is_mean_wind():
    wind = WindModel(c0=0.1, v_o=[2.0, 3.0], V_o=np.zeros((2, 2)))
    states = init_swarm(small_scenario(wind=wind))
    for s in states:
        assert np.array_equal(s.v, [2.0, 3.0])


def test_non_square_swarm_rejected():
    with pytest.raises(ConfigError):
        small_scenario(n_uavs=5).validate()
    with pytest.raises(ConfigError):
        small_scenario(n_uavs=0).validate()


def test_scenario_validation_errors():
    with pytest.raises(ConfigError):
        small_scenario(dt=0.0).validate()
    with pytest.raises(ConfigError):
        small_scenario(controller="lqr").validate()
    with pytest.raises(ConfigError):
        small_scenario(k_inner=0).validate()


def test_default_mf_domain_covers_swarm():
    states = init_swarm(small_scenario())
    dom = default_mf_domain(states, points_per_axis=3)
    for s in states:
        assert dom.contains(s.as_vector())
    assert np.all(dom.widths >= 2.0)  # half-width floor


def test_cfl_timestep():
    assert cfl_max_timestep(1.0, 1.0) == 0.5
    assert cfl_max_timestep(1.0) == 1.0
    assert cfl_max_timestep(2.0, 2.0) == 1.0
    with pytest.raises(ValueError):
        cfl_max_timestep(0.0, 1.0)
    with pytest.raises(ValueError):
        cfl_max_timestep(1.0, -1.0)


def test_make_streams_independent_and_reproducible():
    a = make_streams(7, 3)
    b = make_streams(7, 3)
    draws_a = [g.standard_normal(4) for g in a]
    draws_b = [g.standard_normal(4) for g in b]
    for da, db in zip(draws_a, draws_b):
        assert np.array_equal(da, db)
    assert not np.array_equal(draws_a[0], draws_a[1])


@pytest.mark.parametrize("controller", ["hjb", "mfg"])
def test_step_is_invariant_to_processing_order(controller):
    sc = small_scenario(controller=controller)
    step_fn = hjb_learning_step if controller == "hjb" else mfg_learning_step

    rt1 = build_runtime(sc)
    log1 = RunLog(n_uavs=sc.n_uavs, dt=sc.dt)
    log1.gradient_ledger.new_step()
    step_fn(rt1, sc, log1, 0)

    rt2 = build_runtime(sc)
    log2 = RunLog(n_uavs=sc.n_uavs, dt=sc.dt)
    log2.gradient_ledger.new_step()
    step_fn(rt2, sc, log2, 0, order=[3, 1, 0, 2])

    for s1, s2 in zip(rt1.states, rt2.states):
        assert np.array_equal(s1.as_vector(), s2.as_vector())
    for m1, m2 in zip(rt1.value_models, rt2.value_models):
        assert np.array_equal(m1.weights, m2.weights)
    assert log1.gradient_ledger.total == log2.gradient_ledger.total


@pytest.mark.parametrize("controller", ["hjb", "mfg"])
def test_run_is_deterministic(controller):
    sc1 = small_scenario(controller=controller, seed=3)
    sc2 = small_scenario(controller=controller, seed=3)
    log1, log2 = run(sc1), run(sc2)
    assert len(log1.rows) == len(log2.rows)
    for r1, r2 in zip(log1.rows, log2.rows):
        assert r1 == r2
    assert log1.frozen == log2.frozen


def test_run_row_count_and_terminal_rows():
    sc = small_scenario(controller="hjb", max_steps=3)
    log = run(sc)
    assert log.steps_run == 3
    assert len(log.rows) == sc.n_uavs * (log.steps_run + 1)
    terminal = [r for r in log.rows if r.step == log.steps_run]
    assert len(terminal) == sc.n_uavs
    assert all(r.ax == 0.0 and r.ay == 0.0 for r in terminal)


def test_run_zero_steps():
    sc = small_scenario(controller="hjb", max_steps=0)
    log = run(sc)
    assert log.steps_run == 0
    assert len(log.rows) == sc.n_uavs
    assert log.termination == "max_steps"


def test_destination_termination_without_dynamics():
    # a single UAV born at the destination with no wind never needs to move
    wind = WindModel(c0=0.1, v_o=[0.0, 0.0], V_o=np.zeros((2, 2)))
    sc = small_scenario(
        n_uavs=1, controller="hjb", source_center=(0.0, 0.0), wind=wind, max_steps=10
    )
    log = run(sc)
    assert log.termination == "destination"
    assert log.steps_run == 0
    assert log.collisions == []


def test_mfg_exchange_ledger_counts_initial_broadcast_only():
    sc = small_scenario(controller="mfg", n_uavs=4, max_steps=2)
    log = run(sc)
    assert log.exchange_ledger.per_step[0] == 4 * 3
    assert log.exchange_ledger.total == 12


def test_hjb_exchange_ledger_counts_neighbor_messages():
    # short comm range on a 1 m grid: the 4 corners each see 2 neighbors
    sc = small_scenario(controller="hjb", n_uavs=4, grid_spacing=1.0, max_steps=1)
    sc.comms.tx_power = 1e-3  # 1 m range
    log = run(sc)
    assert log.exchange_ledger.per_step[0] == 4 * 2
    sc_iso = small_scenario(controller="hjb", n_uavs=4, grid_spacing=1.5, max_steps=1)
    sc_iso.comms.tx_power = 1e-3
    assert run(sc_iso).exchange_ledger.per_step[0] == 0


def test_gradient_ledger_per_step_counts():
    sc = small_scenario(controller="hjb", max_steps=2)
    log = run(sc)
    assert log.gradient_ledger.per_step == [4, 4]
    sc = small_scenario(controller="mfg", max_steps=2, k_inner=5)
    log = run(sc)
    # K value updates + K density updates per UAV per step
    assert log.gradient_ledger.per_step == [4 * 10, 4 * 10]


def test_divergent_swarm_freezes_and_stays_finite():
    # far from the destination with an aggressive stabilizer term the
    # training gradients blow up; affected UAVs must freeze, not corrupt
    sc = Scenario(
        n_uavs=4,
        source_center=(150.0, 100.0),
        grid_spacing=np.sqrt(2.0),
        controller="hjb",
        max_steps=5,
        train=TrainConfig(mu=0.01, c_H=0.5),
    )
    log = run(sc)
    assert len(log.frozen) == 4
    for row in log.rows:
        assert np.isfinite([row.x, row.y, row.vx, row.vy]).all()
    # frozen UAVs stop exchanging and computing
    assert log.gradient_ledger.per_step[-1] == 0
