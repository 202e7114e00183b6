"""Loading, validation and synthesis of weekly uncertainty data.

CSV schema for training scenarios (one row per week/hour/scenario):

    week,hour,scenario,residual_demand,avail_1,...,avail_I

`week` is 0-based, `hour` runs 1..H (hour k holds the uncertainty realised
at the k-th instant of the week's right-closed block), `scenario` runs
1..N. Chronicles use the same layout with a leading `chronicle` column
(1..C) instead of `scenario`.

Weekly independence of the blocks is assumed by the Bellman recursions and
is deliberately not checked here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ScenarioFormatError
from .system_model import HourlyUncertainty
from .timeline import Timeline

_FMT = "%.17g"


@dataclass(frozen=True)
class WeekBlock:
    """One week of hourly uncertainties: demand (H,) and availability (H, I)."""

    demand: np.ndarray
    avail: np.ndarray

    def __post_init__(self):
        demand = np.asarray(self.demand, dtype=float)
        raw = np.asarray(self.avail)
        if demand.ndim != 1 or raw.ndim != 2 or raw.shape[0] != demand.shape[0]:
            raise ValueError("demand must be (H,), avail must be (H, num_units)")
        if not np.all(np.isfinite(demand)):
            raise ValueError("residual demand must be finite")
        if not np.all((raw == 0) | (raw == 1)):
            raise ValueError("availabilities must be 0 or 1")
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "avail", raw.astype(int))

    @property
    def hours_per_week(self) -> int:
        return self.demand.shape[0]

    @property
    def num_units(self) -> int:
        return self.avail.shape[1]

    def hours(self) -> list[HourlyUncertainty]:
        return [
            HourlyUncertainty(float(self.demand[k]), self.avail[k])
            for k in range(self.hours_per_week)
        ]


@dataclass(frozen=True)
class ScenarioSet:
    """Per week, N equiprobable weekly blocks used to train Bellman functions."""

    blocks: tuple[tuple[WeekBlock, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(row) for row in self.blocks)
        if not blocks or not blocks[0]:
            raise ValueError("scenario set must contain at least one week and scenario")
        n = len(blocks[0])
        h = blocks[0][0].hours_per_week
        i = blocks[0][0].num_units
        for w, row in enumerate(blocks):
            if len(row) != n:
                raise ValueError(f"week {w}: inconsistent scenario count {len(row)} != {n}")
            for b in row:
                if b.hours_per_week != h or b.num_units != i:
                    raise ValueError(f"week {w}: inconsistent block shape")
        object.__setattr__(self, "blocks", blocks)

    @property
    def num_weeks(self) -> int:
        return len(self.blocks)

    @property
    def num_scenarios(self) -> int:
        return len(self.blocks[0])

    @property
    def hours_per_week(self) -> int:
        return self.blocks[0][0].hours_per_week

    @property
    def num_units(self) -> int:
        return self.blocks[0][0].num_units

    def week(self, w: int) -> tuple[WeekBlock, ...]:
        return self.blocks[w]


@dataclass(frozen=True)
class Chronicle:
    """A full-horizon uncertainty realisation used for simulation."""

    weeks: tuple[WeekBlock, ...]

    def __post_init__(self):
        weeks = tuple(self.weeks)
        if not weeks:
            raise ValueError("chronicle must cover at least one week")
        h = weeks[0].hours_per_week
        i = weeks[0].num_units
        for w, b in enumerate(weeks):
            if b.hours_per_week != h or b.num_units != i:
                raise ValueError(f"chronicle week {w}: inconsistent block shape")
        object.__setattr__(self, "weeks", weeks)

    @property
    def num_weeks(self) -> int:
        return len(self.weeks)


def _avail_columns(num_units: int) -> list[str]:
    return [f"avail_{i + 1}" for i in range(num_units)]


def _parse_avail(row: dict, cols: list[str], where: str) -> np.ndarray:
    out = np.zeros(len(cols), dtype=int)
    for j, c in enumerate(cols):
        raw = row[c]
        try:
            v = float(raw)
        except ValueError:
            raise ScenarioFormatError(f"{where}: column {c} is not a number: {raw!r}")
        if v not in (0.0, 1.0):
            raise ScenarioFormatError(f"{where}: column {c} must be 0 or 1, got {raw!r}")
        out[j] = int(v)
    return out


def _read_rows(path, required: list[str]):
    path = Path(path)
    if not path.exists():
        raise ScenarioFormatError(f"file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise ScenarioFormatError(f"{path}: missing column {col!r}")
        rows = list(reader)
    if not rows:
        raise ScenarioFormatError(f"{path}: no data rows")
    return rows, header


def load_scenarios(path, tl: Timeline, num_units: int) -> ScenarioSet:
    """Read and validate a training scenario CSV against the timeline."""
    cols = _avail_columns(num_units)
    rows, _ = _read_rows(path, ["week", "hour", "scenario", "residual_demand"] + cols)
    W, H = tl.num_weeks, tl.hours_per_week

    seen: dict[tuple[int, int], dict[int, tuple[float, np.ndarray]]] = {}
    scen_ids: set[int] = set()
    for ln, row in enumerate(rows, start=2):
        where = f"{path} line {ln}"
        try:
            w = int(row["week"])
            h = int(row["hour"])
            n = int(row["scenario"])
            d = float(row["residual_demand"])
        except ValueError as exc:
            raise ScenarioFormatError(f"{where}: bad index or demand value ({exc})")
        if not 0 <= w < W:
            raise ScenarioFormatError(f"{where}: week {w} outside [0, {W})")
        if not 1 <= h <= H:
            raise ScenarioFormatError(f"{where}: hour {h} outside [1, {H}]")
        if n < 1:
            raise ScenarioFormatError(f"{where}: scenario {n} must be >= 1")
        if not np.isfinite(d):
            raise ScenarioFormatError(f"{where}: residual_demand must be finite")
        avail = _parse_avail(row, cols, where)
        key = (w, n)
        hours = seen.setdefault(key, {})
        if h in hours:
            raise ScenarioFormatError(f"{where}: duplicate (week={w}, hour={h}, scenario={n})")
        hours[h] = (d, avail)
        scen_ids.add(n)

    n_max = max(scen_ids)
    if scen_ids != set(range(1, n_max + 1)):
        raise ScenarioFormatError(f"{path}: scenario ids must be 1..N, got {sorted(scen_ids)}")
    blocks = []
    for w in range(W):
        row_blocks = []
        for n in range(1, n_max + 1):
            hours = seen.get((w, n))
            if hours is None:
                raise ScenarioFormatError(
                    f"{path}: inconsistent scenario count: week {w} missing scenario {n}")
            if set(hours) != set(range(1, H + 1)):
                missing = sorted(set(range(1, H + 1)) - set(hours))
                raise ScenarioFormatError(
                    f"{path}: week {w} scenario {n} missing hours {missing}")
            demand = np.array([hours[h][0] for h in range(1, H + 1)])
            avail = np.stack([hours[h][1] for h in range(1, H + 1)])
            row_blocks.append(WeekBlock(demand, avail))
        blocks.append(tuple(row_blocks))
    return ScenarioSet(tuple(blocks))


def save_scenarios(scenarios: ScenarioSet, path) -> None:
    cols = _avail_columns(scenarios.num_units)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["week", "hour", "scenario", "residual_demand"] + cols)
        for w in range(scenarios.num_weeks):
            for n, block in enumerate(scenarios.week(w), start=1):
                for k in range(block.hours_per_week):
                    writer.writerow(
                        [w, k + 1, n, _FMT % block.demand[k]]
                        + [int(v) for v in block.avail[k]]
                    )


def load_chronicles(path, tl: Timeline, num_units: int) -> list[Chronicle]:
    """Read simulation chronicles; returns them ordered by chronicle id."""
    cols = _avail_columns(num_units)
    rows, _ = _read_rows(path, ["chronicle", "week", "hour", "residual_demand"] + cols)
    W, H = tl.num_weeks, tl.hours_per_week

    seen: dict[int, dict[tuple[int, int], tuple[float, np.ndarray]]] = {}
    for ln, row in enumerate(rows, start=2):
        where = f"{path} line {ln}"
        try:
            c = int(row["chronicle"])
            w = int(row["week"])
            h = int(row["hour"])
            d = float(row["residual_demand"])
        except ValueError as exc:
            raise ScenarioFormatError(f"{where}: bad index or demand value ({exc})")
        if c < 1:
            raise ScenarioFormatError(f"{where}: chronicle {c} must be >= 1")
        if not 0 <= w < W:
            raise ScenarioFormatError(f"{where}: week {w} outside [0, {W})")
        if not 1 <= h <= H:
            raise ScenarioFormatError(f"{where}: hour {h} outside [1, {H}]")
        avail = _parse_avail(row, cols, where)
        cell = seen.setdefault(c, {})
        if (w, h) in cell:
            raise ScenarioFormatError(f"{where}: duplicate (chronicle={c}, week={w}, hour={h})")
        cell[(w, h)] = (d, avail)

    c_max = max(seen)
    if set(seen) != set(range(1, c_max + 1)):
        raise ScenarioFormatError(f"{path}: chronicle ids must be 1..C, got {sorted(seen)}")
    chronicles = []
    for c in range(1, c_max + 1):
        cell = seen[c]
        expect = {(w, h) for w in range(W) for h in range(1, H + 1)}
        if set(cell) != expect:
            raise ScenarioFormatError(f"{path}: chronicle {c} does not cover every week/hour")
        weeks = []
        for w in range(W):
            demand = np.array([cell[(w, h)][0] for h in range(1, H + 1)])
            avail = np.stack([cell[(w, h)][1] for h in range(1, H + 1)])
            weeks.append(WeekBlock(demand, avail))
        chronicles.append(Chronicle(tuple(weeks)))
    return chronicles


def save_chronicles(chronicles: Sequence[Chronicle], path) -> None:
    cols = _avail_columns(chronicles[0].weeks[0].num_units)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chronicle", "week", "hour", "residual_demand"] + cols)
        for c, chron in enumerate(chronicles, start=1):
            for w, block in enumerate(chron.weeks):
                for k in range(block.hours_per_week):
                    writer.writerow(
                        [c, w, k + 1, _FMT % block.demand[k]]
                        + [int(v) for v in block.avail[k]]
                    )


@dataclass(frozen=True)
class SynthSpec:
    """Knobs for the synthetic case study generator.

    Unit 0 plays the role of the outage-prone base unit: scenario 1 of every
    week starts with a forced multi-hour outage of that unit, and chronicle 1
    carries the same outage in the middle week of the horizon.
    """

    num_weeks: int
    hours_per_week: int
    num_scenarios: int
    num_chronicles: int
    num_units: int = 3
    demand_base: float = 4.0
    demand_amplitude: float = 2.0
    demand_noise: float = 0.5
    outage_prob: float = 0.1
    outage_len_hours: int = 3

    def __post_init__(self):
        if min(self.num_weeks, self.hours_per_week, self.num_scenarios,
               self.num_chronicles, self.num_units) < 1:
            raise ValueError("synthesis dimensions must be >= 1")
        if not 0.0 <= self.outage_prob <= 1.0:
            raise ValueError("outage_prob must lie in [0, 1]")
        if self.outage_len_hours < 1:
            raise ValueError("outage_len_hours must be >= 1")


def _synth_block(rng, spec: SynthSpec, w: int) -> WeekBlock:
    H, I = spec.hours_per_week, spec.num_units
    season = np.sin(2.0 * np.pi * (w + 1) / max(spec.num_weeks, 2))
    profile = np.sin(2.0 * np.pi * np.arange(H) / max(H, 2))
    demand = (spec.demand_base
              + spec.demand_amplitude * (0.6 * season + 0.4 * profile)
              + spec.demand_noise * rng.standard_normal(H))
    avail = np.ones((H, I), dtype=int)
    for i in range(I):
        if rng.random() < spec.outage_prob:
            start = int(rng.integers(0, H))
            stop = min(H, start + spec.outage_len_hours)
            avail[start:stop, i] = 0
    return WeekBlock(demand, avail)


def synthesize_case_study(seed: int, spec: SynthSpec) -> tuple[ScenarioSet, list[Chronicle]]:
    """Deterministic synthetic scenarios and chronicles from a seed.

    Real operator scenario data is proprietary, so the generator mimics its
    structure only: a seasonal demand level with intra-week shape and noise,
    sporadic multi-hour unit outages, and one guaranteed base-unit outage
    (scenario 1 of every week; chronicle 1 in the middle week).
    """
    rng = np.random.default_rng(seed)
    outage = min(spec.hours_per_week, spec.outage_len_hours)

    blocks = []
    for w in range(spec.num_weeks):
        row = []
        for n in range(spec.num_scenarios):
            block = _synth_block(rng, spec, w)
            if n == 0:
                avail = block.avail.copy()
                avail[:outage, 0] = 0
                block = WeekBlock(block.demand, avail)
            row.append(block)
        blocks.append(tuple(row))
    scenarios = ScenarioSet(tuple(blocks))

    chronicles = []
    mid = spec.num_weeks // 2
    for c in range(spec.num_chronicles):
        weeks = []
        for w in range(spec.num_weeks):
            block = _synth_block(rng, spec, w)
            if c == 0 and w == mid:
                avail = block.avail.copy()
                avail[:outage, 0] = 0
                block = WeekBlock(block.demand, avail)
            weeks.append(block)
        chronicles.append(Chronicle(tuple(weeks)))
    return scenarios, chronicles
