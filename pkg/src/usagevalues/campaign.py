"""Verification campaigns: randomized oracle equivalence and the toy
information-ordering chain.

The branch-and-bound solver and the enumeration oracle take entirely
different routes to the same weekly values (different search strategies,
different LP solvers, different matrix assembly); agreement over randomized
instances is the strongest internal evidence the package offers. The chain
check builds small Bellman tables with the oracles alone and verifies the
information ordering: weekly anticipative <= two-stage <= hourly recourse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intraweek import expectation, solve_week_dhd, solve_week_hd
from .oracles import brute_force_week, tree_from_blocks, wphr_week_toy
from .pwl import PiecewiseLinear
from .scenario_io import ScenarioSet, WeekBlock
from .sdp import StateGrid
from .system_model import Storage, SystemModel, ThermalUnit
from .timeline import Timeline


def random_instance(rng: np.random.Generator):
    """A small random weekly instance: (model, x0, blocks, ctg).

    Dimensions stay inside the enumeration guards (H <= 3, <= 2 units,
    <= 5-point cost-to-go); costs, bounds, demands and availabilities are
    drawn broadly, including negative demands, zero start-up costs and
    nonconvex cost-to-go shapes.
    """
    H = int(rng.integers(1, 4))
    I = int(rng.integers(1, 3))
    n_blocks = int(rng.integers(1, 4))
    x_max = float(rng.uniform(2.0, 6.0))
    storage = Storage(
        x_min=0.0,
        x_max=x_max,
        pump_max=float(rng.uniform(0.0, 2.0)) * (rng.random() < 0.8),
        turb_max=float(rng.uniform(0.0, 2.0)) * (rng.random() < 0.8),
        eta=float(rng.uniform(0.5, 1.0)),
    )
    units = []
    for i in range(I):
        p_min = float(rng.uniform(0.3, 1.0))
        units.append(ThermalUnit(
            name=f"u{i + 1}",
            p_min=p_min,
            p_max=p_min + float(rng.uniform(0.2, 2.0)),
            startup_cost=float(rng.uniform(0.0, 8.0)) * (rng.random() < 0.8),
            variable_cost=float(rng.uniform(2.0, 30.0)),
            speed_class="slow" if rng.random() < 0.5 else "fast",
        ))
    n_bp = int(rng.integers(2, 6))
    bp = np.linspace(0.0, x_max, n_bp)
    ctg = PiecewiseLinear(bp, rng.uniform(-50.0, 50.0, size=n_bp))
    model = SystemModel(
        storage=storage,
        units=tuple(units),
        ens_penalty=10.0 * max(u.variable_cost for u in units) + 50.0,
        final_cost=PiecewiseLinear(np.array([0.0, x_max]), np.array([0.0, -1.0])),
        initial_stock=0.5 * x_max,
    )
    cap = sum(u.p_max for u in units)
    blocks = []
    for _ in range(n_blocks):
        demand = rng.uniform(-1.0, cap + 2.0, size=H)
        avail = (rng.random((H, I)) < 0.8).astype(int)
        blocks.append(WeekBlock(demand, avail))
    x0 = float(rng.uniform(0.0, x_max))
    return model, x0, blocks, ctg


@dataclass(frozen=True)
class CampaignReport:
    instances: int
    max_rel_dev_hd: float
    max_rel_dev_dhd: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def oracle_equivalence_campaign(n_instances: int, seed: int,
                                rel_tol: float = 1e-6) -> CampaignReport:
    """Solver vs brute force on randomized instances, both structures."""
    rng = np.random.default_rng(seed)
    max_hd = 0.0
    max_dhd = 0.0
    failures = []
    for j in range(n_instances):
        model, x0, blocks, ctg = random_instance(rng)
        probs = [1.0 / len(blocks)] * len(blocks)

        solver_hd = expectation(
            [solve_week_hd(x0, b, ctg, model).value for b in blocks], probs)
        oracle_hd = brute_force_week(x0, blocks, ctg, model, "hd")
        dev = abs(solver_hd - oracle_hd) / max(1.0, abs(oracle_hd))
        max_hd = max(max_hd, dev)
        if dev > rel_tol:
            failures.append(
                f"instance {j}: hd solver={solver_hd!r} oracle={oracle_hd!r}")

        solver_dhd = solve_week_dhd(x0, blocks, ctg, model).value
        oracle_dhd = brute_force_week(x0, blocks, ctg, model, "dhd")
        dev = abs(solver_dhd - oracle_dhd) / max(1.0, abs(oracle_dhd))
        max_dhd = max(max_dhd, dev)
        if dev > rel_tol:
            failures.append(
                f"instance {j}: dhd solver={solver_dhd!r} oracle={oracle_dhd!r}")
    return CampaignReport(n_instances, max_hd, max_dhd, tuple(failures))


@dataclass(frozen=True)
class ChainReport:
    """Oracle Bellman tables for the three information structures."""

    grid: StateGrid
    hd: np.ndarray     # (W + 1, P)
    dhd: np.ndarray
    wphr: np.ndarray
    worst_hd_dhd: float   # most negative dhd - hd entry
    worst_dhd_wphr: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def wphr_chain_check(model: SystemModel, scenarios: ScenarioSet, grid: StateGrid,
                     tl: Timeline, tol: float = 1e-9) -> ChainReport:
    """Brute-force Bellman tables under all three structures, chain-checked.

    The hourly-recourse table uses the scenario tree induced by
    prefix-merging each week's blocks, so all three tables describe the
    same uncertainty and the ordering must hold pointwise.
    """
    W = tl.num_weeks
    pts = grid.points
    P = pts.size
    terminal = model.final_cost.sample(pts)
    tables = {name: np.empty((W + 1, P)) for name in ("hd", "dhd", "wphr")}
    for name in tables:
        tables[name][W] = terminal
    for w in reversed(range(W)):
        blocks = scenarios.week(w)
        tree = tree_from_blocks(blocks)
        for name, fn in (
            ("hd", lambda x, c: brute_force_week(x, blocks, c, model, "hd")),
            ("dhd", lambda x, c: brute_force_week(x, blocks, c, model, "dhd")),
            ("wphr", lambda x, c: wphr_week_toy(x, tree, c, model)),
        ):
            ctg = PiecewiseLinear(pts, tables[name][w + 1])
            tables[name][w] = [fn(float(x), ctg) for x in pts]

    gap1 = tables["dhd"] - tables["hd"]
    gap2 = tables["wphr"] - tables["dhd"]
    failures = []
    for label, gap in (("hd<=dhd", gap1), ("dhd<=wphr", gap2)):
        worst = float(np.min(gap))
        if worst < -tol:
            w, p = np.unravel_index(int(np.argmin(gap)), gap.shape)
            failures.append(f"{label} violated by {-worst} at week {w}, x={pts[p]}")
    return ChainReport(grid, tables["hd"], tables["dhd"], tables["wphr"],
                       float(np.min(gap1)), float(np.min(gap2)), tuple(failures))
