"""Compare the two controllers on a small swarm near the destination.

Four UAVs start one meter apart, one meter from the origin. The
neighbor-based controller ("hjb") averages the flocking cost over whoever
is inside its communication radius, which costs one state message per
neighbor per step. The mean-field controller ("mfg") replaces neighbors
with a learned population density: everyone broadcasts once at t = 0, fits
a density model, and never communicates again - at the price of extra
gradient work per step (K alternating value/density updates).

The online learners are aggressive: weights move a fixed norm per step, so
value functions (and with them the motion energy) can grow very fast. The
horizon here is kept short; UAVs whose gradients overflow are frozen.
"""

import numpy as np

from mfguav import CommsConfig, Scenario, TrainConfig, energy_summary, run


def scenario(controller: str) -> Scenario:
    return Scenario(
        n_uavs=4,
        source_center=(1.0, -1.0),
        grid_spacing=1.0,
        controller=controller,
        max_steps=5,
        seed=7,
        mf_points_per_axis=5,
        comms=CommsConfig(tx_power=1e-1),  # ~ 10 m radius: everyone in range
        train=TrainConfig(mu=0.01, c_H=0.0),
    )


logs = {c: run(scenario(c)) for c in ("hjb", "mfg")}

print(f"{'controller':<12} {'messages':>9} {'gradients':>10} {'motion':>10} "
      f"{'collisions':>11}")
for name, log in logs.items():
    e = energy_summary(log)
    print(f"{name:<12} {e.communication:>9} {e.computation:>10} {e.motion:>10.3e} "
          f"{len(log.collisions):>11}")

ratios = energy_summary(logs["mfg"], logs["hjb"])[1]
print("\nmfg relative to hjb:")
for key, val in ratios.items():
    print(f"  {key}: {'n/a' if val is None else f'{val:.3g}'}")
