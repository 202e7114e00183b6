"""Anatomy of the weekly subproblems.

One week, two units (a slow base unit and a fast peaker), a small pumped
storage, and two demand scenarios. We solve the week three ways:

* per-scenario with everything wait-and-see (the hazard-decision solve),
* as a two-stage problem with a shared slow on/off plan
  (decision-hazard-decision),
* recourse-only, with a slow plan we freeze by hand.

The two-stage value can never beat the average of the wait-and-see values;
the gap is the price of deciding the slow schedule before the scenario is
known.
"""

import numpy as np

from usagevalues import (PiecewiseLinear, Storage, SystemModel, ThermalUnit,
                         WeekBlock, evaluate_recourse, solve_week_dhd,
                         solve_week_hd)

storage = Storage(x_min=0.0, x_max=6.0, pump_max=1.0, turb_max=1.5, eta=0.85)
units = (
    ThermalUnit("base", p_min=1.5, p_max=3.0, startup_cost=40.0,
                variable_cost=10.0, speed_class="slow"),
    ThermalUnit("peak", p_min=0.3, p_max=3.0, startup_cost=2.0,
                variable_cost=55.0, speed_class="fast"),
)
bp = np.array([0.0, 6.0])
model = SystemModel(storage, units, ens_penalty=600.0,
                    final_cost=PiecewiseLinear(bp, -18.0 * bp),
                    initial_stock=3.0)

# end-of-week value of stored energy: 18 currency units per MWh
ctg = model.final_cost

# scenario 1: quiet week; scenario 2: demand surge in the afternoon
low = WeekBlock(np.array([0.8, 0.5, 0.2, 0.9, 1.2, 0.7]), np.ones((6, 2), dtype=int))
high = WeekBlock(np.array([2.5, 3.2, 4.5, 5.0, 4.0, 2.8]), np.ones((6, 2), dtype=int))
x0 = 3.0


def show(tag, sol, block):
    print(f"\n  {tag}: stage cost {sol.stage_cost:8.2f}, end stock {sol.x_next:.2f}, "
          f"value {sol.value:8.2f}")
    print("    hour   demand   base  peak   pump   turb    ens")
    for k, (ctrl, d) in enumerate(zip(sol.controls, block.demand)):
        print(f"    {k + 1:4d}   {d:6.2f}   {ctrl.modulation[0]:4.1f}  "
              f"{ctrl.modulation[1]:4.1f}   {ctrl.pump:4.2f}   {ctrl.turb:4.2f}"
              f"   {ctrl.ens:4.2f}")


print("=== wait-and-see (hazard-decision), one solve per scenario ===")
hd_low = solve_week_hd(x0, low, ctg, model)
hd_high = solve_week_hd(x0, high, ctg, model)
show("quiet scenario", hd_low, low)
show("surge scenario", hd_high, high)
hd_avg = 0.5 * (hd_low.value + hd_high.value)
print(f"\n  average wait-and-see value: {hd_avg:.2f}")

print("\n=== two-stage (decision-hazard-decision), one shared slow plan ===")
dhd = solve_week_dhd(x0, [low, high], ctg, model)
print(f"  shared base-unit plan over the week: {dhd.slow_plan.T.tolist()}")
show("quiet recourse", dhd.per_scenario[0], low)
show("surge recourse", dhd.per_scenario[1], high)
print(f"\n  two-stage value: {dhd.value:.2f}  "
      f"(information gap vs wait-and-see: {dhd.value - hd_avg:.2f})")

print("\n=== recourse with a deliberately bad frozen plan (base on all week) ===")
always_on = np.ones((6, 1), dtype=int)
forced = evaluate_recourse(x0, always_on, low, ctg, model)
print(f"  quiet scenario under an always-on base unit: value {forced.value:.2f} "
      f"(optimal plan gave {dhd.per_scenario[0].value:.2f})")
