"""Massive-UAV path planning under wind: HJB-learning and MFG-learning
controllers with full energy and collision accounting."""

from .basis import PolynomialBasis, build_basis
from .comms import CommsConfig, comm_range, neighbors
from .cost import CostParams, global_cost_mf, global_cost_neighbors, local_cost, regularizer
from .dynamics import UavState, WindModel, nominal_derivative, step, system_matrices
from .engine import RunLog, Scenario, cfl_max_timestep, init_swarm, make_streams, run
from .errors import ConfigError, TrainingDivergenceError
from .fpk import fit_initial, fpk_residual, fpk_update
from .hjb import hjb_residual_mf, hjb_residual_neighbors, ngd_update, optimal_action
from .metrics import count_collisions, energy_summary, regularizer_series
from .models import (
    DensityModel,
    EmpiricalDensity,
    IntegrationDomain,
    TrainConfig,
    ValueModel,
)

__all__ = [
    "CommsConfig", "ConfigError", "CostParams", "DensityModel",
    "EmpiricalDensity", "IntegrationDomain", "PolynomialBasis", "RunLog",
    "Scenario", "TrainConfig", "TrainingDivergenceError", "UavState",
    "ValueModel", "WindModel", "build_basis", "cfl_max_timestep",
    "comm_range", "count_collisions", "energy_summary", "fit_initial",
    "fpk_residual", "fpk_update", "global_cost_mf", "global_cost_neighbors",
    "hjb_residual_mf", "hjb_residual_neighbors", "init_swarm", "local_cost",
    "make_streams",
    "neighbors", "ngd_update", "nominal_derivative", "optimal_action",
    "regularizer", "regularizer_series", "run", "step", "system_matrices",
]
