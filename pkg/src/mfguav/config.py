"""Flat key/value run configuration: parsing, defaults, and serialization.

Format: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored. Every key is optional; unset keys take the paper-default values.
An empty file therefore yields the default 25-UAV scenario.

Keys
----
controller            "hjb" or "mfg"
n_uavs                perfect square
source_center_x/_y    source square center (m)
grid_spacing          inter-UAV spacing at the source (m)
dt, max_steps, k_inner, dest_tol, seed
c0, wind_vx, wind_vy  OU wind drag and mean velocity
wind_sigma            isotropic wind covariance factor (V_o = sigma * I)
c1, c2, c3, c4, beta, eps, r_singularity_tol
mu, c_h, grad_fd_step
tx_power, noise_power, path_loss_exp
snr_threshold         linear SNR threshold (or snr_threshold_db in dB)
collision_threshold   collision-count distance (m)
domain_lower_* / domain_upper_* (x, y, vx, vy), domain_points
                      optional mean-field integration box; all 9 keys or
                      none (default: auto from the initial swarm)
"""

from __future__ import annotations

import numpy as np

from .comms import CommsConfig, snr_db_to_linear
from .cost import CostParams
from .dynamics import WindModel
from .engine import Scenario
from .errors import ConfigError
from .models import IntegrationDomain, TrainConfig

_FLOAT_KEYS = {
    "source_center_x", "source_center_y", "grid_spacing", "dt", "dest_tol",
    "c0", "wind_vx", "wind_vy", "wind_sigma",
    "c1", "c2", "c3", "c4", "beta", "eps", "r_singularity_tol",
    "mu", "c_h", "grad_fd_step",
    "tx_power", "noise_power", "snr_threshold", "snr_threshold_db",
    "path_loss_exp", "collision_threshold",
    "domain_lower_x", "domain_lower_y", "domain_lower_vx", "domain_lower_vy",
    "domain_upper_x", "domain_upper_y", "domain_upper_vx", "domain_upper_vy",
}
_INT_KEYS = {"n_uavs", "max_steps", "k_inner", "seed", "domain_points"}
_STR_KEYS = {"controller"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS

_DOMAIN_KEYS = [
    "domain_lower_x", "domain_lower_y", "domain_lower_vx", "domain_lower_vy",
    "domain_upper_x", "domain_upper_y", "domain_upper_vx", "domain_upper_vy",
    "domain_points",
]

DEFAULT_COLLISION_THRESHOLD = 0.1


def _parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                pairs[key] = float(value)
            elif key in _INT_KEYS:
                pairs[key] = int(value)
            else:
                pairs[key] = value
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for key {key!r}: {value!r}")
    return pairs


def scenario_from_pairs(pairs: dict) -> Scenario:
    pairs = dict(pairs)

    def pop(key, default):
        return pairs.pop(key, default)

    if "snr_threshold" in pairs and "snr_threshold_db" in pairs:
        raise ConfigError("give snr_threshold or snr_threshold_db, not both")
    if "snr_threshold_db" in pairs:
        theta = snr_db_to_linear(pairs.pop("snr_threshold_db"))
    else:
        theta = pop("snr_threshold", snr_db_to_linear(-10.0))

    domain_given = [k for k in _DOMAIN_KEYS if k in pairs]
    if domain_given and len(domain_given) != len(_DOMAIN_KEYS):
        missing = sorted(set(_DOMAIN_KEYS) - set(domain_given))
        raise ConfigError(f"incomplete integration domain; missing keys {missing}")

    def build(cls, kwargs, keys):
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"invalid value among keys {keys}: {exc}")

    wind = build(
        WindModel,
        dict(
            c0=pop("c0", 0.1),
            v_o=np.array([pop("wind_vx", 1.0), pop("wind_vy", -1.0)]),
            V_o=pop("wind_sigma", 0.1) * np.eye(2),
        ),
        "c0/wind_vx/wind_vy/wind_sigma",
    )
    cost = build(
        CostParams,
        dict(
            c1=pop("c1", 100.0), c2=pop("c2", 1.5), c3=pop("c3", 1.5),
            c4=pop("c4", 0.5), beta=pop("beta", 1.0), eps=pop("eps", 0.001),
            r_singularity_tol=pop("r_singularity_tol", 1e-6),
        ),
        "c1/c2/c3/c4/beta/eps/r_singularity_tol",
    )
    comms_cfg = build(
        CommsConfig,
        dict(
            tx_power=pop("tx_power", 10.0),
            noise_power=pop("noise_power", 1e-2),
            snr_threshold=theta,
            path_loss_exp=pop("path_loss_exp", 2.0),
        ),
        "tx_power/noise_power/snr_threshold/path_loss_exp",
    )
    train = build(
        TrainConfig,
        dict(
            mu=pop("mu", 0.01), c_H=pop("c_h", 0.5),
            grad_fd_step=pop("grad_fd_step", 1e-6),
        ),
        "mu/c_h/grad_fd_step",
    )

    mf_domain = None
    points = 9
    if domain_given:
        lower = [pairs.pop(f"domain_lower_{ax}") for ax in ("x", "y", "vx", "vy")]
        upper = [pairs.pop(f"domain_upper_{ax}") for ax in ("x", "y", "vx", "vy")]
        points = pairs.pop("domain_points")
        try:
            mf_domain = IntegrationDomain(lower, upper, points)
        except ValueError as exc:
            raise ConfigError(f"invalid integration domain: {exc}")

    collision_threshold = pop("collision_threshold", DEFAULT_COLLISION_THRESHOLD)
    if not collision_threshold > 0:
        raise ConfigError("collision_threshold must be positive")

    sc = Scenario(
        n_uavs=pop("n_uavs", 25),
        source_center=(pop("source_center_x", 150.0), pop("source_center_y", 100.0)),
        grid_spacing=pop("grid_spacing", float(np.sqrt(2.0))),
        wind=wind,
        cost=cost,
        comms=comms_cfg,
        train=train,
        controller=pop("controller", "mfg"),
        dt=pop("dt", 1.0),
        max_steps=pop("max_steps", 200),
        k_inner=pop("k_inner", 5),
        dest_tol=pop("dest_tol", 1.0),
        seed=pop("seed", 0),
        mf_domain=mf_domain,
        mf_points_per_axis=points,
        collision_threshold=collision_threshold,
    )
    sc.validate()
    assert not pairs, f"unconsumed keys: {sorted(pairs)}"
    return sc


def parse_config(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_pairs(_parse_pairs(fh.read()))


def _r(x) -> str:
    """repr of a plain Python float (numpy scalars repr differently)."""
    return repr(float(x))


def serialize_scenario(sc: Scenario) -> str:
    """Inverse of parse_config; parse(serialize(sc)) reproduces sc."""
    V = sc.wind.V_o
    if not np.allclose(V, V[0, 0] * np.eye(2)) or V[0, 0] != V[1, 1]:
        raise ConfigError("only isotropic wind covariance (sigma * I) serializes")
    lines = [
        f"controller = {sc.controller}",
        f"n_uavs = {sc.n_uavs}",
        f"source_center_x = {_r(sc.source_center[0])}",
        f"source_center_y = {_r(sc.source_center[1])}",
        f"grid_spacing = {_r(sc.grid_spacing)}",
        f"dt = {_r(sc.dt)}",
        f"max_steps = {sc.max_steps}",
        f"k_inner = {sc.k_inner}",
        f"dest_tol = {_r(sc.dest_tol)}",
        f"seed = {sc.seed}",
        f"c0 = {_r(sc.wind.c0)}",
        f"wind_vx = {_r(sc.wind.v_o[0])}",
        f"wind_vy = {_r(sc.wind.v_o[1])}",
        f"wind_sigma = {_r(V[0, 0])}",
        f"c1 = {_r(sc.cost.c1)}",
        f"c2 = {_r(sc.cost.c2)}",
        f"c3 = {_r(sc.cost.c3)}",
        f"c4 = {_r(sc.cost.c4)}",
        f"beta = {_r(sc.cost.beta)}",
        f"eps = {_r(sc.cost.eps)}",
        f"r_singularity_tol = {_r(sc.cost.r_singularity_tol)}",
        f"mu = {_r(sc.train.mu)}",
        f"c_h = {_r(sc.train.c_H)}",
        f"grad_fd_step = {_r(sc.train.grad_fd_step)}",
        f"tx_power = {_r(sc.comms.tx_power)}",
        f"noise_power = {_r(sc.comms.noise_power)}",
        f"snr_threshold = {_r(sc.comms.snr_threshold)}",
        f"path_loss_exp = {_r(sc.comms.path_loss_exp)}",
        f"collision_threshold = {_r(sc.collision_threshold)}",
    ]
    if sc.mf_domain is not None:
        d = sc.mf_domain
        for ax, lo, hi in zip(("x", "y", "vx", "vy"), d.lower, d.upper):
            lines.append(f"domain_lower_{ax} = {_r(lo)}")
            lines.append(f"domain_upper_{ax} = {_r(hi)}")
        lines.append(f"domain_points = {d.points_per_axis}")
    return "\n".join(lines) + "\n"
