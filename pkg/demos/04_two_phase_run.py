"""
One two-phase trajectory: drag-aligned velocities, conserved masses, and the
velocity-mismatch norm history.

Run:  python3 demos/04_two_phase_run.py
"""

import numpy as np

from driftflow import Grid, PhysParams, Scheme, integrate
from driftflow.besov import chemin_lerner_norm
from driftflow.initial_data import DataRecipe, euler_ns_state
from driftflow.integrate import BlockObserver, ScalarObserver
from driftflow.spectral import l2_norm

grid = Grid(dim=2, npts=64, length=16.0 * np.pi)
params = PhysParams(tau=0.05, mu=1.0, lam=0.0)
state0 = euler_ns_state(grid, DataRecipe(amplitude=0.05, seed=42))

print("initial velocity mismatch:", l2_norm(state0.u - state0.v))

observers = [
    ScalarObserver("mismatch", lambda s, t: l2_norm(s.u - s.v)),
    ScalarObserver("gas_energy", lambda s, t: l2_norm(s.v)),
    BlockObserver("rel", lambda s: s.u - s.v),
]
traj = integrate(state0, T=10.0, scheme=Scheme(dt=0.05), params=params,
                 system="euler_ns", observers=observers, sample_dt=0.1)

if traj.meta["t_ramp"] > 0:
    print(f"steps: {traj.meta['steps']} (ramp through t={traj.meta['t_ramp']:.3f} "
          "resolves the drag layer)")
else:
    print(f"steps: {traj.meta['steps']} (friction time resolved by the main step)")
print(f"mass drift over the run: {traj.meta['mass_drift']:.3e}")

for t_probe in (0.0, 0.2, 1.0, 5.0, 10.0):
    i = int(np.argmin(np.abs(traj.times - t_probe)))
    print(f"t={traj.times[i]:6.2f}  |u-v| = {traj.scalars['mismatch'][i]:.6f}"
          f"   |v| = {traj.scalars['gas_energy'][i]:.6f}")

l1 = chemin_lerner_norm(traj.blocks["rel"], rho=1.0, s=1.0)
l2t = chemin_lerner_norm(traj.blocks["rel"], rho=2.0, s=0.0)
print(f"time-integrated mismatch norms: L1 {l1:.5f},  square-mean {l2t:.5f}")
print("halve tau and both shrink; the relaxation sweep fits the rates.")
