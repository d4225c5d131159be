"""Run orchestration: swarm initialization, per-step controller updates for
both controllers, the main run loop, and the CFL time-step utility.

Within one step every control decision reads a synchronous snapshot of the
pre-step states, so the per-UAV processing order cannot change the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import comms, fpk, hjb
from .basis import build_basis
from .comms import CommsConfig, CountLedger
from .cost import CostParams
from .dynamics import UavState, WindModel, step as dyn_step
from .errors import ConfigError, TrainingDivergenceError
from .models import DensityModel, IntegrationDomain, TrainConfig, ValueModel

HJB_CONTROLLER = "hjb"
MFG_CONTROLLER = "mfg"

# minimum half-width (per axis) of the auto-derived mean-field domain, so a
# noiseless swarm still yields a box of positive volume
MIN_DOMAIN_HALF_WIDTH = 1.0


@dataclass
class Scenario:
    n_uavs: int = 25
    source_center: tuple[float, float] = (150.0, 100.0)
    grid_spacing: float = float(np.sqrt(2.0))
    wind: WindModel = field(default_factory=WindModel)
    cost: CostParams = field(default_factory=CostParams)
    comms: CommsConfig = field(default_factory=CommsConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    controller: str = MFG_CONTROLLER
    dt: float = 1.0
    max_steps: int = 200
    k_inner: int = 5
    dest_tol: float = 1.0
    seed: int = 0
    mf_domain: IntegrationDomain | None = None
    mf_points_per_axis: int = 9
    collision_threshold: float = 0.1

    def validate(self):
        if self.n_uavs < 1:
            raise ConfigError("n_uavs must be positive")
        side = int(round(np.sqrt(self.n_uavs)))
        if side * side != self.n_uavs:
            raise ConfigError("n_uavs must be a perfect square for grid placement")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.grid_spacing > 0:
            raise ConfigError("grid_spacing must be positive")
        if not self.dest_tol > 0:
            raise ConfigError("dest_tol must be positive")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be non-negative")
        if self.k_inner < 1:
            raise ConfigError("k_inner must be positive")
        if self.controller not in (HJB_CONTROLLER, MFG_CONTROLLER):
            raise ConfigError(f"unknown controller {self.controller!r}")


@dataclass
class StepRow:
    step: int
    t: float
    uav: int
    x: float
    y: float
    vx: float
    vy: float
    ax: float
    ay: float
    loss: float
    reg_active: bool


@dataclass
class CollisionEvent:
    step: int
    i: int
    j: int
    distance: float


@dataclass
class RunLog:
    n_uavs: int
    dt: float
    rows: list[StepRow] = field(default_factory=list)
    collisions: list[CollisionEvent] = field(default_factory=list)
    exchange_ledger: CountLedger = field(default_factory=CountLedger)
    gradient_ledger: CountLedger = field(default_factory=CountLedger)
    frozen: list[int] = field(default_factory=list)
    steps_run: int = 0
    termination: str = ""


def make_streams(seed: int, n: int) -> list[np.random.Generator]:
    """One counter-based stream per UAV; independent by construction."""
    return [
        np.random.Generator(np.random.Philox(ss))
        for ss in np.random.SeedSequence(seed).spawn(n)
    ]


def init_swarm(sc: Scenario, rngs=None) -> list[UavState]:
    """Square grid centered at the source; initial velocity is the mean wind
    plus one noise increment drawn from each UAV's own stream."""
    sc.validate()
    if rngs is None:
        rngs = make_streams(sc.seed, sc.n_uavs)
    side = int(round(np.sqrt(sc.n_uavs)))
    offsets = (np.arange(side) - (side - 1) / 2.0) * sc.grid_spacing
    cx, cy = sc.source_center
    states = []
    for i in range(sc.n_uavs):
        row, col = divmod(i, side)
        r = np.array([cx + offsets[col], cy + offsets[row]])
        xi = rngs[i].standard_normal(2)
        v = sc.wind.v_o + sc.wind.V_o @ xi * np.sqrt(sc.dt)
        states.append(UavState(r=r, v=v))
    return states


def default_mf_domain(states: list[UavState], points_per_axis: int = 9) -> IntegrationDomain:
    """Bounding box of the initial swarm states inflated by 50% about its
    center, with a floor on the half-widths."""
    S = np.stack([s.as_vector() for s in states])
    lo, hi = S.min(axis=0), S.max(axis=0)
    center = 0.5 * (lo + hi)
    half = np.maximum(0.75 * (hi - lo), MIN_DOMAIN_HALF_WIDTH)
    return IntegrationDomain(center - half, center + half, points_per_axis)


def cfl_max_timestep(dx: float, dy: float | None = None) -> float:
    """Largest stable explicit time step: (1/dx + 1/dy)^-1, or dx in 1-D."""
    if not dx > 0 or (dy is not None and not dy > 0):
        raise ValueError("grid spacings must be positive")
    if dy is None:
        return float(dx)
    return 1.0 / (1.0 / dx + 1.0 / dy)


@dataclass
class _SwarmRuntime:
    states: list[UavState]
    value_models: list[ValueModel]
    density_models: list[DensityModel] | None
    density_prev: list[DensityModel] | None
    rngs: list[np.random.Generator]
    frozen: list[bool]
    comm_range: float


def _freeze(rt: _SwarmRuntime, log: RunLog, i: int):
    if not rt.frozen[i]:
        rt.frozen[i] = True
        log.frozen.append(i)


def hjb_learning_step(
    rt: _SwarmRuntime, sc: Scenario, log: RunLog, step_idx: int, order=None
):
    """One control instant of HJB learning: per UAV, collect neighbor states
    from the pre-step snapshot, run one value update against the neighbor
    cost, act, and advance."""
    snapshot = list(rt.states)
    new_states = list(rt.states)
    results: dict[int, tuple] = {}
    for i in order if order is not None else range(sc.n_uavs):
        if rt.frozen[i]:
            results[i] = (snapshot[i], np.zeros(2), 0.0, False, 0, 0)
            continue
        nbr_idx = comms.neighbors(snapshot, i, rt.comm_range)
        nbr_states = [snapshot[j] for j in nbr_idx]
        try:
            model, rec = hjb.ngd_update(
                rt.value_models[i], snapshot[i], nbr_states, sc.wind, sc.cost, sc.train
            )
            with np.errstate(over="ignore", invalid="ignore"):
                a = hjb.optimal_action(model, snapshot[i], sc.cost)
                s_new = dyn_step(snapshot[i], a, sc.wind, sc.dt, rt.rngs[i])
            rt.value_models[i] = model
            results[i] = (
                s_new, a, rec.loss, rec.regularizer_active, len(nbr_idx),
                rec.gradient_evals,
            )
        except TrainingDivergenceError:
            _freeze(rt, log, i)
            results[i] = (snapshot[i], np.zeros(2), float("nan"), False, len(nbr_idx), 0)
    for i in range(sc.n_uavs):
        s_new, a, loss, reg, n_msgs, n_grads = results[i]
        new_states[i] = s_new
        log.exchange_ledger.record(n_msgs)
        log.gradient_ledger.record(n_grads)
        _log_row(log, step_idx, sc.dt, i, snapshot[i], a, loss, reg)
    rt.states = new_states


def mfg_learning_step(
    rt: _SwarmRuntime, sc: Scenario, log: RunLog, step_idx: int, order=None
):
    """One control instant of MFG learning: per UAV, K alternating inner
    updates of the value model (against its current density) and the density
    model (against the current value model), then act. No communication."""
    snapshot = list(rt.states)
    new_states = list(rt.states)
    results: dict[int, tuple] = {}
    for i in order if order is not None else range(sc.n_uavs):
        if rt.frozen[i]:
            results[i] = (snapshot[i], np.zeros(2), 0.0, False, 0)
            continue
        vm = rt.value_models[i]
        dm = rt.density_models[i]
        dm_prev = rt.density_prev[i]
        s_i = snapshot[i]
        loss = float("nan")
        reg_any = False
        grads = 0
        try:
            for _ in range(sc.k_inner):
                vm, rec_v = hjb.ngd_update(vm, s_i, dm, sc.wind, sc.cost, sc.train)
                grads += rec_v.gradient_evals
                dm, rec_f = fpk.fpk_update(
                    dm, vm, s_i, sc.wind, sc.cost, dm_prev, sc.dt, sc.train
                )
                grads += rec_f.gradient_evals
                loss = rec_v.loss
                reg_any = reg_any or rec_v.regularizer_active
            with np.errstate(over="ignore", invalid="ignore"):
                a = hjb.optimal_action(vm, s_i, sc.cost)
                s_new = dyn_step(s_i, a, sc.wind, sc.dt, rt.rngs[i])
            rt.value_models[i] = vm
            rt.density_models[i] = dm
            rt.density_prev[i] = dm
            results[i] = (s_new, a, loss, reg_any, grads)
        except TrainingDivergenceError:
            _freeze(rt, log, i)
            results[i] = (snapshot[i], np.zeros(2), float("nan"), reg_any, grads)
    for i in range(sc.n_uavs):
        s_new, a, loss, reg, n_grads = results[i]
        new_states[i] = s_new
        log.gradient_ledger.record(n_grads)
        _log_row(log, step_idx, sc.dt, i, snapshot[i], a, loss, reg)
    rt.states = new_states


def _log_row(log, step_idx, dt, i, s: UavState, a, loss, reg):
    log.rows.append(
        StepRow(
            step=step_idx,
            t=step_idx * dt,
            uav=i,
            x=float(s.r[0]),
            y=float(s.r[1]),
            vx=float(s.v[0]),
            vy=float(s.v[1]),
            ax=float(a[0]),
            ay=float(a[1]),
            loss=float(loss),
            reg_active=bool(reg),
        )
    )


def _record_collisions(log: RunLog, states: list[UavState], step_idx: int, threshold: float):
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                d = float(np.linalg.norm(states[j].r - states[i].r))
                if d < threshold:
                    log.collisions.append(
                        CollisionEvent(step=step_idx, i=i, j=j, distance=d)
                    )


def _all_arrived(states, frozen, tol):
    for s, fz in zip(states, frozen):
        if fz:
            return False
        if np.linalg.norm(s.r) > tol or np.linalg.norm(s.v) > tol:
            return False
    return True


def run(sc: Scenario, collision_threshold: float | None = None) -> RunLog:
    """Run the scenario to completion. Deterministic given the seed."""
    sc.validate()
    if collision_threshold is None:
        collision_threshold = sc.collision_threshold
    rngs = make_streams(sc.seed, sc.n_uavs)
    states = init_swarm(sc, rngs)
    log = RunLog(n_uavs=sc.n_uavs, dt=sc.dt)

    hjb_basis = build_basis("hjb")
    value_models = [
        ValueModel(hjb_basis, np.zeros(len(hjb_basis))) for _ in range(sc.n_uavs)
    ]
    density_models = None
    density_prev = None
    log.exchange_ledger.new_step()
    if sc.controller == MFG_CONTROLLER:
        # one-shot full exchange at the source, then local fitting
        log.exchange_ledger.record(sc.n_uavs * (sc.n_uavs - 1))
        fpk_basis = build_basis("fpk")
        domain = sc.mf_domain or default_mf_domain(states, sc.mf_points_per_axis)
        shared, _ = fpk.fit_initial(states, fpk_basis, domain)
        density_models = [shared.with_weights(shared.weights.copy()) for _ in range(sc.n_uavs)]
        density_prev = [shared.with_weights(shared.weights.copy()) for _ in range(sc.n_uavs)]

    rt = _SwarmRuntime(
        states=states,
        value_models=value_models,
        density_models=density_models,
        density_prev=density_prev,
        rngs=rngs,
        frozen=[False] * sc.n_uavs,
        comm_range=comms.comm_range(sc.comms),
    )

    _record_collisions(log, rt.states, 0, collision_threshold)
    log.termination = "max_steps"
    step_idx = 0
    while step_idx < sc.max_steps:
        if _all_arrived(rt.states, rt.frozen, sc.dest_tol):
            log.termination = "destination"
            break
        if step_idx > 0:
            log.exchange_ledger.new_step()
        log.gradient_ledger.new_step()
        if sc.controller == HJB_CONTROLLER:
            hjb_learning_step(rt, sc, log, step_idx)
        else:
            mfg_learning_step(rt, sc, log, step_idx)
        step_idx += 1
        _record_collisions(log, rt.states, step_idx, collision_threshold)
    else:
        if _all_arrived(rt.states, rt.frozen, sc.dest_tol):
            log.termination = "destination"

    log.steps_run = step_idx
    # terminal row: final state, no action
    for i, s in enumerate(rt.states):
        _log_row(log, step_idx, sc.dt, i, s, np.zeros(2), 0.0, False)
    return log
