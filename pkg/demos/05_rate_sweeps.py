"""
Miniature versions of the two headline sweeps: the friction-time relaxation
rate and the low-Mach acoustic rate.  Desk-scale versions with tighter grids
live behind `driftflow relaxation` / `driftflow incompressible` and in the
acceptance battery.

Run:  python3 demos/05_rate_sweeps.py       (about a minute)
"""

import numpy as np

from driftflow import Grid
from driftflow.studies import incompressible_study, relaxation_study

print("== velocity-mismatch relaxation ==")
grid = Grid(2, 32, 16.0 * np.pi)
res = relaxation_study([0.4, 0.2, 0.1, 0.05], grid=grid, T=12.0, dt=0.05)
for tau, val in zip(res.parameters, res.measurements["sqrt_family"]):
    print(f"  tau={tau:<5} mixed mismatch norm = {val:.5f}")
print("  sqrt-family fit:", res.fits["sqrt_family"])
print("  tau-family fit: ", res.fits["tau_family"])

print("== low-Mach acoustic damping ==")
grid = Grid(2, 48, 16.0 * np.pi)
res = incompressible_study([0.4, 0.2, 0.1], system="df_scaled", grid=grid, T=12.0)
for eps, val in zip(res.parameters, res.measurements["acoustic_norm"]):
    print(f"  eps={eps:<5} acoustic norm = {val:.5f}")
print("  fit:", res.fits["acoustic_norm"])
print("  (finite-box dispersion: the fitted slope sits below the free-space rate)")
