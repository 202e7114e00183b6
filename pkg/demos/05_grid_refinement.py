"""How the value tables react to grid refinement.

The storage grid is the only approximation in the pipeline: weekly solves
are exact, but cost-to-go functions are sampled on the grid and
interpolated. Halving the step changes the values at shared grid points;
successive changes shrink as the piecewise-linear interpolant closes in on
the true (possibly kinked, possibly nonconvex) value function. Nothing is
thresholded here; the numbers are simply reported.
"""

import numpy as np

from usagevalues import (PiecewiseLinear, Storage, SynthSpec, SystemModel,
                         ThermalUnit, Timeline, solve_bellman_dhd,
                         synthesize_case_study)
from usagevalues.sdp import StateGrid

W, H, N = 3, 4, 3
storage = Storage(0.0, 8.0, pump_max=1.0, turb_max=1.5, eta=0.85)
units = (
    ThermalUnit("base", 1.2, 2.5, 25.0, 10.0, "slow"),
    ThermalUnit("peak", 0.3, 2.0, 3.0, 45.0, "fast"),
)
bp = np.array([0.0, 8.0])
model = SystemModel(storage, units, 500.0, PiecewiseLinear(bp, -15.0 * bp), 4.0)
spec = SynthSpec(num_weeks=W, hours_per_week=H, num_scenarios=N, num_chronicles=1,
                 num_units=2, demand_base=2.0, demand_amplitude=1.5,
                 demand_noise=1.5, outage_prob=0.2, outage_len_hours=2)
scenarios, _ = synthesize_case_study(4, spec)
tl = Timeline(W, H)

coarse = StateGrid(0.0, 8.0, 5)
tables = {}
grid = coarse
for level in range(3):
    tables[level] = solve_bellman_dhd(model, scenarios, grid, tl)
    grid = grid.refined()

print("week-0 values at the coarse grid points, per refinement level:")
print("  x     step=2.0     step=1.0     step=0.5")
for p, x in enumerate(coarse.points):
    row = [tables[lvl].values[0, p * (2 ** lvl)] for lvl in range(3)]
    print(f"  {x:3.0f}  {row[0]:11.3f}  {row[1]:11.3f}  {row[2]:11.3f}")

print("\nlargest change at shared points when halving the step:")
for lvl in range(2):
    a = tables[lvl].values[:, :]
    b = tables[lvl + 1].values[:, ::2]
    print(f"  level {lvl} -> {lvl + 1}: {float(np.max(np.abs(a - b))):.4f}")
