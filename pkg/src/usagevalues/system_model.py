"""Physical and economic primitives of the storage-plus-thermal system.

One time step is one hour, so MW and MWh coincide numerically. Thermal
modulation is semi-continuous: a committed, available unit produces within
[p_min, p_max], otherwise exactly zero. The energy balance is an
inequality (overproduction allowed); shortage is absorbed by the penalised
slack `ens` (energy not supplied).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pwl import PiecewiseLinear

SLOW = "slow"
FAST = "fast"


@dataclass(frozen=True)
class Storage:
    x_min: float
    x_max: float
    pump_max: float
    turb_max: float
    eta: float

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("storage requires x_min < x_max")
        if self.pump_max < 0 or self.turb_max < 0:
            raise ValueError("pump_max and turb_max must be >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("efficiency eta must lie in [0, 1]")


@dataclass(frozen=True)
class ThermalUnit:
    name: str
    p_min: float
    p_max: float
    startup_cost: float
    variable_cost: float
    speed_class: str

    def __post_init__(self):
        if not 0 < self.p_min <= self.p_max:
            raise ValueError(f"unit {self.name}: need 0 < p_min <= p_max")
        if self.startup_cost < 0 or self.variable_cost < 0:
            raise ValueError(f"unit {self.name}: costs must be >= 0")
        if self.speed_class not in (SLOW, FAST):
            raise ValueError(f"unit {self.name}: speed_class must be 'slow' or 'fast'")

    @property
    def is_slow(self) -> bool:
        return self.speed_class == SLOW


@dataclass(frozen=True)
class SystemModel:
    storage: Storage
    units: tuple[ThermalUnit, ...]
    ens_penalty: float
    final_cost: PiecewiseLinear
    initial_stock: float

    def __post_init__(self):
        units = tuple(self.units)
        object.__setattr__(self, "units", units)
        if not units:
            raise ValueError("at least one thermal unit is required")
        if self.ens_penalty <= max(u.variable_cost for u in units):
            raise ValueError("ens_penalty must exceed every unit's variable cost")
        slack = 1e-9
        if (self.final_cost.lo > self.storage.x_min + slack
                or self.final_cost.hi < self.storage.x_max - slack):
            raise ValueError("final_cost must be defined on the full storage range")
        if not self.storage.x_min - slack <= self.initial_stock <= self.storage.x_max + slack:
            raise ValueError("initial_stock outside the storage range")

    @property
    def num_units(self) -> int:
        return len(self.units)

    @property
    def slow_indices(self) -> tuple[int, ...]:
        return tuple(i for i, u in enumerate(self.units) if u.is_slow)

    @property
    def fast_indices(self) -> tuple[int, ...]:
        return tuple(i for i, u in enumerate(self.units) if not u.is_slow)


@dataclass(frozen=True)
class HourlyControl:
    commit: np.ndarray      # per-unit on/off
    modulation: np.ndarray  # per-unit power, 0 or within [p_min, p_max]
    pump: float
    turb: float
    ens: float

    def __post_init__(self):
        object.__setattr__(self, "commit", np.asarray(self.commit, dtype=int))
        object.__setattr__(self, "modulation", np.asarray(self.modulation, dtype=float))


@dataclass(frozen=True)
class HourlyUncertainty:
    residual_demand: float
    availability: np.ndarray  # per-unit 0/1

    def __post_init__(self):
        raw = np.asarray(self.availability)
        if not np.all((raw == 0) | (raw == 1)):
            raise ValueError("availability entries must be 0 or 1")
        object.__setattr__(self, "availability", raw.astype(int))


def hourly_dynamics(x: float, pump: float, turb: float, storage: Storage) -> float:
    """One-hour storage update: x + eta*pump - turb.

    Feasibility against [x_min, x_max] is the solver's business, not ours.
    """
    return x + storage.eta * pump - turb


def weekly_dynamics(x: float, pumps: Sequence[float], turbs: Sequence[float],
                    storage: Storage) -> float:
    """Stock after a week, the hour-by-hour composition of hourly_dynamics.

    Equals the closed-form x + sum(eta*pump - turb); both forms agree since
    the hourly map is a pure translation of the stock.
    """
    pumps = np.asarray(pumps, dtype=float)
    turbs = np.asarray(turbs, dtype=float)
    if pumps.shape != turbs.shape or pumps.ndim != 1:
        raise ValueError("pumps and turbs must be 1-D vectors of equal length")
    out = x
    for p, t in zip(pumps, turbs):
        out = hourly_dynamics(out, p, t, storage)
    return out


def production(commit: int, modulation: float, avail: int) -> float:
    """Effective output: modulation gated by min(commit, avail)."""
    return modulation * min(int(commit), int(avail))


def balance_residual(ctrl: HourlyControl, unc: HourlyUncertainty,
                     units: Sequence[ThermalUnit]) -> float:
    """Signed hourly balance: production + slack minus pumping and demand.

    Feasible operation requires a nonnegative residual; positive values are
    allowed overproduction.
    """
    prod = sum(
        production(ctrl.commit[i], ctrl.modulation[i], unc.availability[i])
        for i in range(len(units))
    )
    return (ctrl.turb + prod + ctrl.ens) - (ctrl.pump + unc.residual_demand)


def hourly_cost(commit_now: np.ndarray, commit_prev: np.ndarray,
                productions: np.ndarray, ens: float, model: SystemModel) -> float:
    """Start-up plus variable thermal cost plus the shortage penalty."""
    commit_now = np.asarray(commit_now)
    commit_prev = np.asarray(commit_prev)
    cost = 0.0
    for i, u in enumerate(model.units):
        cost += u.startup_cost * max(int(commit_now[i]) - int(commit_prev[i]), 0)
        cost += u.variable_cost * float(productions[i])
    return cost + model.ens_penalty * float(ens)


def weekly_cost(x: float, week_controls: Sequence[HourlyControl],
                week_unc: Sequence[HourlyUncertainty], model: SystemModel) -> float:
    """Sum of hourly costs over the week.

    Hour 0 is charged against an all-off previous commitment (the week-start
    reset), so units running in hour 0 always pay their start-up cost.
    """
    if len(week_controls) != len(week_unc):
        raise ValueError("controls and uncertainties must have the same length")
    prev = np.zeros(model.num_units, dtype=int)
    total = 0.0
    for ctrl, unc in zip(week_controls, week_unc):
        prods = np.array([
            production(ctrl.commit[i], ctrl.modulation[i], unc.availability[i])
            for i in range(model.num_units)
        ])
        total += hourly_cost(ctrl.commit, prev, prods, ctrl.ens, model)
        prev = ctrl.commit
    return total
