"""Backward Bellman recursions on the storage grid, usage values, comparisons.

Week w is computed from week w+1's row interpolated piecewise-linearly on
the grid; the terminal row is the final storage value sampled on the grid.
Expectations are exact finite sums with uniform weights, accumulated in
scenario order so that serial and threaded runs agree bitwise.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ScenarioFormatError, SolverFailure
from .intraweek import CostToGo, expectation, solve_week_dhd, solve_week_hd
from .pwl import PiecewiseLinear
from .scenario_io import ScenarioSet
from .system_model import SystemModel
from .timeline import Timeline

_FMT = "%.17g"
HD = "hd"
DHD = "dhd"


@dataclass(frozen=True)
class StateGrid:
    x_min: float
    x_max: float
    num_points: int

    def __post_init__(self):
        if self.num_points < 2:
            raise ValueError("grid needs at least two points")
        if not self.x_min < self.x_max:
            raise ValueError("grid requires x_min < x_max")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.num_points)

    @property
    def step(self) -> float:
        return (self.x_max - self.x_min) / (self.num_points - 1)

    @property
    def midpoints(self) -> np.ndarray:
        pts = self.points
        return 0.5 * (pts[:-1] + pts[1:])

    def refined(self) -> "StateGrid":
        """Same range with the step halved."""
        return StateGrid(self.x_min, self.x_max, 2 * self.num_points - 1)


@dataclass(frozen=True)
class BellmanTable:
    structure: str            # "hd" or "dhd"
    grid: StateGrid
    values: np.ndarray        # (num_weeks + 1, num_points), terminal row last

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 2 or vals.shape[1] != self.grid.num_points:
            raise ValueError("table must be (num_weeks + 1) x num_points")
        if not np.all(np.isfinite(vals)):
            raise ValueError("table values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def num_weeks(self) -> int:
        return self.values.shape[0] - 1

    def cost_to_go(self, week: int) -> CostToGo:
        """Piecewise-linear interpolant of the row entered at `week + 1`."""
        return PiecewiseLinear(self.grid.points, self.values[week + 1])


def _check_inputs(model: SystemModel, scenarios: ScenarioSet, grid: StateGrid,
                  tl: Timeline) -> None:
    if scenarios.num_weeks != tl.num_weeks:
        raise ScenarioFormatError(
            f"scenario set covers {scenarios.num_weeks} weeks, timeline has {tl.num_weeks}")
    if scenarios.hours_per_week != tl.hours_per_week:
        raise ScenarioFormatError(
            f"scenario blocks have {scenarios.hours_per_week} hours, "
            f"timeline expects {tl.hours_per_week}")
    if scenarios.num_units != model.num_units:
        raise ScenarioFormatError(
            f"scenario availabilities cover {scenarios.num_units} units, "
            f"model has {model.num_units}")
    st = model.storage
    if abs(grid.x_min - st.x_min) > 1e-9 or abs(grid.x_max - st.x_max) > 1e-9:
        raise ValueError("grid must span exactly the storage range")


def _map_points(task, points, threads: int):
    if threads <= 1:
        return [task(x) for x in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, points))


def _solve_backward(model, scenarios, grid, tl, threads, point_value, tag):
    W = tl.num_weeks
    pts = grid.points
    values = np.empty((W + 1, grid.num_points))
    values[W] = model.final_cost.sample(pts)
    probs = np.full(scenarios.num_scenarios, 1.0 / scenarios.num_scenarios)
    for w in reversed(range(W)):
        ctg = PiecewiseLinear(pts, values[w + 1])
        blocks = scenarios.week(w)

        def task(x, w=w, ctg=ctg, blocks=blocks):
            try:
                return point_value(x, blocks, ctg, probs)
            except SolverFailure as exc:
                raise SolverFailure(f"week {w}, grid x={x}: {exc}") from exc

        values[w] = _map_points(task, pts, threads)
    return BellmanTable(tag, grid, values)


def solve_bellman_hd(model: SystemModel, scenarios: ScenarioSet, grid: StateGrid,
                     tl: Timeline, threads: int = 1) -> BellmanTable:
    """Weekly backward recursion with fully disclosed weekly blocks."""
    _check_inputs(model, scenarios, grid, tl)

    def point_value(x, blocks, ctg, probs):
        vals = []
        for n, block in enumerate(blocks):
            try:
                vals.append(solve_week_hd(x, block, ctg, model).value)
            except SolverFailure as exc:
                raise SolverFailure(f"scenario {n + 1}: {exc}") from exc
        return expectation(vals, probs)

    return _solve_backward(model, scenarios, grid, tl, threads, point_value, HD)


def solve_bellman_dhd(model: SystemModel, scenarios: ScenarioSet, grid: StateGrid,
                      tl: Timeline, threads: int = 1) -> BellmanTable:
    """Weekly backward recursion with a nonanticipative slow-unit plan."""
    _check_inputs(model, scenarios, grid, tl)

    def point_value(x, blocks, ctg, probs):
        return solve_week_dhd(x, blocks, ctg, model, probs).value

    return _solve_backward(model, scenarios, grid, tl, threads, point_value, DHD)


def eval_bellman(table: BellmanTable, week: int, x: float) -> float:
    """Piecewise-linear interpolation of a table row; no extrapolation."""
    if not 0 <= week <= table.num_weeks:
        raise IndexError(f"week {week} outside [0, {table.num_weeks}]")
    fn = PiecewiseLinear(table.grid.points, table.values[week])
    return fn(x)


def usage_values(table: BellmanTable, week: int) -> np.ndarray:
    """Storage prices at grid midpoints: minus the finite-difference slope."""
    if not 0 <= week < table.num_weeks:
        raise IndexError(f"week {week} outside [0, {table.num_weeks})")
    row = table.values[week]
    return -np.diff(row) / table.grid.step


def usage_value_series(table: BellmanTable) -> np.ndarray:
    """(num_weeks, num_points - 1) array of midpoint usage values."""
    return np.stack([usage_values(table, w) for w in range(table.num_weeks)])


@dataclass(frozen=True)
class ComparisonReport:
    """Pointwise DHD-minus-HD gaps and any ordering violations."""

    gaps: np.ndarray                       # (W + 1, P), dhd - hd
    violations: tuple[tuple[int, int, float], ...]  # (week, point index, relative gap)
    max_gap: float
    max_gap_week: int
    max_gap_index: int
    rel_tol: float

    @property
    def ok(self) -> bool:
        return not self.violations


def compare_tables(hd: BellmanTable, dhd: BellmanTable,
                   rel_tol: float = 1e-6) -> ComparisonReport:
    """Check the information ordering: every DHD entry must be >= HD."""
    if hd.grid != dhd.grid or hd.values.shape != dhd.values.shape:
        raise ValueError("tables use different grids or horizons")
    if not np.allclose(hd.values[-1], dhd.values[-1], rtol=0, atol=1e-12):
        raise ValueError("tables disagree on the terminal row")
    gaps = dhd.values - hd.values
    scale = np.maximum(1.0, np.abs(hd.values))
    rel = gaps / scale
    violations = []
    for w, p in zip(*np.where(rel < -rel_tol)):
        violations.append((int(w), int(p), float(rel[w, p])))
    flat = int(np.argmax(gaps))
    w_max, p_max = np.unravel_index(flat, gaps.shape)
    return ComparisonReport(gaps, tuple(violations), float(gaps[w_max, p_max]),
                            int(w_max), int(p_max), rel_tol)


# ---- CSV interchange -------------------------------------------------------

def write_bellman_csv(table: BellmanTable, path) -> None:
    pts = table.grid.points
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["week", "x", "value"])
        for w in range(table.num_weeks + 1):
            for p, x in enumerate(pts):
                writer.writerow([w, _FMT % x, _FMT % table.values[w, p]])


def read_bellman_csv(path, structure: str) -> BellmanTable:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cells: dict[tuple[int, float], float] = {}
        xs = set()
        ws = set()
        for row in reader:
            w = int(row["week"])
            x = float(row["x"])
            cells[(w, x)] = float(row["value"])
            xs.add(x)
            ws.add(w)
    if not cells:
        raise ValueError(f"{path}: empty Bellman table")
    pts = np.array(sorted(xs))
    steps = np.diff(pts)
    if pts.size < 2 or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, steps[0]):
        raise ValueError(f"{path}: grid points are not uniformly spaced")
    grid = StateGrid(float(pts[0]), float(pts[-1]), pts.size)
    n_rows = max(ws) + 1
    values = np.empty((n_rows, pts.size))
    for w in range(n_rows):
        for p, x in enumerate(pts):
            if (w, x) not in cells:
                raise ValueError(f"{path}: missing cell week={w}, x={x}")
            values[w, p] = cells[(w, x)]
    return BellmanTable(structure, grid, values)


def write_usage_csv(tables: dict[str, BellmanTable], path) -> None:
    """Midpoint usage values for the structures present (hd, dhd or both)."""
    tags = [t for t in (HD, DHD) if t in tables]
    first = tables[tags[0]]
    mids = first.grid.midpoints
    series = {t: usage_value_series(tables[t]) for t in tags}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["week", "x_mid"] + [f"usage_value_{t}" for t in tags])
        for w in range(first.num_weeks):
            for p, xm in enumerate(mids):
                writer.writerow([w, _FMT % xm] + [_FMT % series[t][w, p] for t in tags])


def write_comparison_csv(hd: BellmanTable, dhd: BellmanTable,
                         report: ComparisonReport, path) -> None:
    pts = hd.grid.points
    viol = {(w, p) for w, p, _ in report.violations}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["week", "x", "value_hd", "value_dhd", "gap", "violation"])
        for w in range(hd.num_weeks + 1):
            for p, x in enumerate(pts):
                writer.writerow([
                    w, _FMT % x, _FMT % hd.values[w, p], _FMT % dhd.values[w, p],
                    _FMT % report.gaps[w, p], int((w, p) in viol),
                ])
