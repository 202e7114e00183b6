"""Policy simulation over full-horizon chronicles, plus dispatch KPIs.

The simulator follows the two-stage weekly policy induced by any Bellman
table: each week the slow plan is chosen against the training scenarios
(never the realised chronicle), then the recourse is optimised against the
realised block with that plan frozen, then the stock is updated. It is
deliberately anticipative within the week, matching the information
structure the tables were built under. The same code serves HD-policy and
DHD-policy simulation; only the table differs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure
from .intraweek import evaluate_recourse, solve_week_dhd
from .scenario_io import Chronicle, ScenarioSet, WeekBlock
from .sdp import BellmanTable
from .system_model import (HourlyControl, SystemModel, balance_residual,
                           hourly_dynamics, production)

_FMT = "%.17g"


@dataclass(frozen=True)
class WeekDispatch:
    week: int
    x_start: float
    slow_plan: np.ndarray              # (H, n_slow)
    controls: tuple[HourlyControl, ...]
    block: WeekBlock                   # realised uncertainties
    stage_cost: float
    x_end: float


@dataclass(frozen=True)
class DispatchTrace:
    label: str
    weeks: tuple[WeekDispatch, ...]
    x_final: float
    final_cost_term: float
    total_cost: float


def _check_week(model: SystemModel, rec: WeekDispatch) -> None:
    st = model.storage
    x = rec.x_start
    for k, (ctrl, unc) in enumerate(zip(rec.controls, rec.block.hours())):
        if balance_residual(ctrl, unc, model.units) < -1e-9:
            raise SolverFailure(f"week {rec.week} hour {k}: balance violated")
        x = hourly_dynamics(x, ctrl.pump, ctrl.turb, st)
        if not st.x_min - 1e-9 <= x <= st.x_max + 1e-9:
            raise SolverFailure(f"week {rec.week} hour {k}: stock {x} outside box")


def simulate_chronicle(model: SystemModel, table: BellmanTable,
                       scenarios: ScenarioSet, chronicle: Chronicle,
                       x0: float, label: str = "") -> DispatchTrace:
    """Dispatch one chronicle under the policy induced by `table`."""
    W = table.num_weeks
    if chronicle.num_weeks != W or scenarios.num_weeks != W:
        raise ValueError("table, scenarios and chronicle must share the horizon")
    H = scenarios.hours_per_week

    x = float(x0)
    records = []
    for w in range(W):
        ctg = table.cost_to_go(w)
        blocks = scenarios.week(w)
        try:
            if model.slow_indices:
                plan = solve_week_dhd(x, blocks, ctg, model).slow_plan
            else:
                plan = np.zeros((H, 0), dtype=int)
            sol = evaluate_recourse(x, plan, chronicle.weeks[w], ctg, model)
        except SolverFailure as exc:
            raise SolverFailure(f"simulation week {w}: {exc}") from exc
        rec = WeekDispatch(w, x, plan, sol.controls, chronicle.weeks[w],
                           sol.stage_cost, sol.x_next)
        _check_week(model, rec)
        records.append(rec)
        x = sol.x_next

    fc_fn = model.final_cost
    fc = fc_fn(min(max(x, fc_fn.lo), fc_fn.hi))
    total = 0.0
    for rec in records:
        total += rec.stage_cost
    total += fc
    return DispatchTrace(label, tuple(records), x, fc, total)


@dataclass(frozen=True)
class KpiSummary:
    """Per-trace means of dispatch indicators (count carries the weight)."""

    count: int
    total_cost: float
    ens_volume: float
    pump_volume: float
    turb_volume: float
    unit_energy: np.ndarray     # (I,)
    unit_startups: np.ndarray   # (I,)
    week_cost: np.ndarray       # (W,)
    week_pump: np.ndarray
    week_turb: np.ndarray
    week_ens: np.ndarray
    stock_path: np.ndarray      # (W + 1,), start-of-week stocks + final
    per_trace: tuple[dict, ...]


def _trace_stats(trace: DispatchTrace, num_units: int):
    W = len(trace.weeks)
    week_cost = np.array([r.stage_cost for r in trace.weeks])
    week_pump = np.array([sum(c.pump for c in r.controls) for r in trace.weeks])
    week_turb = np.array([sum(c.turb for c in r.controls) for r in trace.weeks])
    week_ens = np.array([sum(c.ens for c in r.controls) for r in trace.weeks])
    energy = np.zeros(num_units)
    startups = np.zeros(num_units)
    for r in trace.weeks:
        prev = np.zeros(num_units, dtype=int)
        for ctrl, unc in zip(r.controls, r.block.hours()):
            for i in range(num_units):
                energy[i] += production(ctrl.commit[i], ctrl.modulation[i],
                                        unc.availability[i])
                if ctrl.commit[i] == 1 and prev[i] == 0:
                    startups[i] += 1
            prev = ctrl.commit
    stock = np.array([r.x_start for r in trace.weeks] + [trace.x_final])
    return week_cost, week_pump, week_turb, week_ens, energy, startups, stock


def aggregate_kpis(traces) -> KpiSummary:
    """Average dispatch indicators over traces (identical traces average to
    themselves, only the count grows)."""
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    num_units = len(traces[0].weeks[0].controls[0].commit)
    n = len(traces)
    acc = None
    per_trace = []
    for t in traces:
        wc, wp, wt, we, en, su, st = _trace_stats(t, num_units)
        row = (t.total_cost, float(we.sum()), float(wp.sum()), float(wt.sum()),
               wc, wp, wt, we, en, su, st)
        per_trace.append({
            "label": t.label,
            "total_cost": t.total_cost,
            "ens_volume": float(we.sum()),
            "pump_volume": float(wp.sum()),
            "turb_volume": float(wt.sum()),
        })
        if acc is None:
            acc = [np.asarray(v, dtype=float) if not np.isscalar(v) else v for v in row]
        else:
            acc = [a + (np.asarray(v, dtype=float) if not np.isscalar(v) else v)
                   for a, v in zip(acc, row)]
    acc = [a / n for a in acc]
    return KpiSummary(n, float(acc[0]), float(acc[1]), float(acc[2]), float(acc[3]),
                      acc[8], acc[9], acc[4], acc[5], acc[6], acc[7], acc[10],
                      tuple(per_trace))


def write_trace_csv(trace: DispatchTrace, chronicle_id: int, storage, path) -> None:
    """Hourly dispatch rows: demand, stock at hour start, controls per unit."""
    num_units = len(trace.weeks[0].controls[0].commit)
    unit_cols = []
    for i in range(num_units):
        unit_cols += [f"unit_{i + 1}_commit", f"unit_{i + 1}_power"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chronicle", "week", "hour", "demand", "stock",
                         "pump", "turb", "ens"] + unit_cols)
        for rec in trace.weeks:
            x = rec.x_start
            for k, (ctrl, unc) in enumerate(zip(rec.controls, rec.block.hours())):
                row = [chronicle_id, rec.week, k + 1,
                       _FMT % unc.residual_demand, _FMT % x,
                       _FMT % ctrl.pump, _FMT % ctrl.turb, _FMT % ctrl.ens]
                for i in range(num_units):
                    power = production(ctrl.commit[i], ctrl.modulation[i],
                                       unc.availability[i])
                    row += [int(ctrl.commit[i]), _FMT % power]
                writer.writerow(row)
                x = hourly_dynamics(x, ctrl.pump, ctrl.turb, storage)


def write_kpi_csv(summaries: dict[str, KpiSummary], path) -> None:
    """One row per (policy, chronicle) plus a mean row per policy."""
    first = next(iter(summaries.values()))
    num_units = first.unit_energy.shape[0]
    cols = ["policy", "scope", "total_cost", "ens_volume", "pump_volume", "turb_volume"]
    unit_cols = []
    for i in range(num_units):
        unit_cols += [f"unit_{i + 1}_energy", f"unit_{i + 1}_startups"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols + unit_cols)
        for policy, summ in summaries.items():
            for c, row in enumerate(summ.per_trace, start=1):
                writer.writerow([policy, f"chronicle_{c}",
                                 _FMT % row["total_cost"], _FMT % row["ens_volume"],
                                 _FMT % row["pump_volume"], _FMT % row["turb_volume"]]
                                + [""] * len(unit_cols))
            writer.writerow([policy, "mean",
                             _FMT % summ.total_cost, _FMT % summ.ens_volume,
                             _FMT % summ.pump_volume, _FMT % summ.turb_volume]
                            + [v for i in range(num_units)
                               for v in (_FMT % summ.unit_energy[i],
                                         _FMT % summ.unit_startups[i])])
