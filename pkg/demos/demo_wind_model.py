"""Sample the Ornstein-Uhlenbeck wind model and check its stationary law.

With no control input the velocity follows a mean-reverting diffusion
around the mean wind v_o = (1, -1) m/s. The stationary distribution has
per-axis variance V_o^2 / (2 c0); a batch of independent simulations should
land on it once the relaxation time 1/c0 has passed a few times over.
"""

import numpy as np

from mfguav import UavState, WindModel, make_streams, step

wind = WindModel(c0=0.1, v_o=[1.0, -1.0], V_o=0.1 * np.eye(2))
dt, n_runs, n_steps = 0.25, 2000, 160  # horizon = 4 relaxation times

rngs = make_streams(seed=123, n=n_runs)
finals = np.empty((n_runs, 2))
for k, rng in enumerate(rngs):
    s = UavState(r=[0.0, 0.0], v=wind.v_o)
    for _ in range(n_steps):
        s = step(s, [0.0, 0.0], wind, dt, rng)
    finals[k] = s.v

target = 0.1**2 / (2 * 0.1)
print(f"stationary variance, closed form: {target:.4f} per axis")
print(f"empirical variance:  vx {finals.var(axis=0)[0]:.4f}, "
      f"vy {finals.var(axis=0)[1]:.4f}")
print(f"empirical mean:      vx {finals.mean(axis=0)[0]:+.3f}, "
      f"vy {finals.mean(axis=0)[1]:+.3f}  (target +1.000, -1.000)")
