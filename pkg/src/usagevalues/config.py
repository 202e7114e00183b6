"""Run configuration: a single JSON document describing a whole pipeline.

Layout (see README for the full schema):

    {
      "timeline":   {"num_weeks": 10, "hours_per_week": 6},
      "model":      {"storage": {...}, "units": [...],
                     "ens_penalty": ..., "final_cost": {...},
                     "initial_stock": ...},
      "grid":       {"num_points": 21},
      "scenarios":  {"path": "..."} | {"synth": {...}},
      "chronicles": {"path": "..."},          # optional with synth
      "seed": 0, "structures": ["hd", "dhd"],
      "toy_wphr": false, "output_dir": "out"
    }

Relative paths resolve against the directory containing the config file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .pwl import PiecewiseLinear
from .scenario_io import (Chronicle, ScenarioSet, SynthSpec, load_chronicles,
                          load_scenarios, synthesize_case_study)
from .sdp import DHD, HD, StateGrid
from .system_model import Storage, SystemModel, ThermalUnit
from .timeline import Timeline


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}.{key}: missing required field")
    return obj[key]


def _num(obj: dict, key: str, where: str, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing required field")
        return default
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    timeline: Timeline
    model: SystemModel
    grid: StateGrid
    scenarios_path: Path | None
    chronicles_path: Path | None
    synth: SynthSpec | None
    seed: int
    structures: tuple[str, ...]
    toy_wphr: bool
    output_dir: Path
    verify_instances: int


def _parse_final_cost(fc, storage: Storage, where: str) -> PiecewiseLinear:
    if not isinstance(fc, dict):
        raise ConfigError(f"{where}: expected an object")
    if "value_per_mwh" in fc:
        p = _num(fc, "value_per_mwh", where)
        if p < 0:
            raise ConfigError(f"{where}.value_per_mwh: must be >= 0")
        bp = np.array([storage.x_min, storage.x_max])
        return PiecewiseLinear(bp, -p * bp)
    if "breakpoints" in fc or "values" in fc:
        bp = _need(fc, "breakpoints", where)
        vals = _need(fc, "values", where)
        try:
            fn = PiecewiseLinear(np.asarray(bp, float), np.asarray(vals, float))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}")
        if np.any(np.diff(fn.values) > 1e-12):
            raise ConfigError(f"{where}: final cost must be nonincreasing in the stock")
        return fn
    raise ConfigError(f"{where}: give either value_per_mwh or breakpoints/values")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    base = path.parent

    tl_raw = _need(raw, "timeline", "config")
    try:
        tl = Timeline(int(_num(tl_raw, "num_weeks", "timeline")),
                      int(_num(tl_raw, "hours_per_week", "timeline")))
    except ValueError as exc:
        raise ConfigError(f"timeline: {exc}")

    m_raw = _need(raw, "model", "config")
    st_raw = _need(m_raw, "storage", "model")
    try:
        storage = Storage(
            _num(st_raw, "x_min", "model.storage"),
            _num(st_raw, "x_max", "model.storage"),
            _num(st_raw, "pump_max", "model.storage"),
            _num(st_raw, "turb_max", "model.storage"),
            _num(st_raw, "eta", "model.storage"),
        )
    except ValueError as exc:
        raise ConfigError(f"model.storage: {exc}")

    units_raw = _need(m_raw, "units", "model")
    if not isinstance(units_raw, list) or not units_raw:
        raise ConfigError("model.units: expected a nonempty list")
    units = []
    for j, u in enumerate(units_raw):
        where = f"model.units[{j}]"
        try:
            units.append(ThermalUnit(
                str(u.get("name", f"unit_{j + 1}")),
                _num(u, "p_min", where),
                _num(u, "p_max", where),
                _num(u, "startup_cost", where),
                _num(u, "variable_cost", where),
                str(_need(u, "speed_class", where)),
            ))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}")

    default_pen = 10.0 * max(u.variable_cost for u in units)
    ens_penalty = _num(m_raw, "ens_penalty", "model", default=default_pen)
    final_cost = _parse_final_cost(_need(m_raw, "final_cost", "model"),
                                   storage, "model.final_cost")
    x0_default = 0.5 * (storage.x_min + storage.x_max)
    initial_stock = _num(m_raw, "initial_stock", "model", default=x0_default)
    try:
        model = SystemModel(storage, tuple(units), ens_penalty, final_cost,
                            initial_stock)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}")

    g_raw = raw.get("grid", {})
    try:
        grid = StateGrid(storage.x_min, storage.x_max,
                         int(_num(g_raw, "num_points", "grid", default=21)))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}")

    sc_raw = _need(raw, "scenarios", "config")
    scen_path = None
    synth = None
    if "path" in sc_raw:
        scen_path = base / sc_raw["path"]
        if not scen_path.exists():
            raise ConfigError(f"scenarios.path: file not found: {scen_path}")
    elif "synth" in sc_raw:
        s = sc_raw["synth"]
        where = "scenarios.synth"
        try:
            synth = SynthSpec(
                num_weeks=tl.num_weeks,
                hours_per_week=tl.hours_per_week,
                num_scenarios=int(_num(s, "num_scenarios", where)),
                num_chronicles=int(_num(s, "num_chronicles", where, default=1)),
                num_units=len(units),
                demand_base=_num(s, "demand_base", where, default=4.0),
                demand_amplitude=_num(s, "demand_amplitude", where, default=2.0),
                demand_noise=_num(s, "demand_noise", where, default=0.5),
                outage_prob=_num(s, "outage_prob", where, default=0.1),
                outage_len_hours=int(_num(s, "outage_len_hours", where, default=3)),
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}")
    else:
        raise ConfigError("scenarios: give either path or synth")

    ch_raw = raw.get("chronicles", {})
    chron_path = None
    if "path" in ch_raw:
        chron_path = base / ch_raw["path"]
        if not chron_path.exists():
            raise ConfigError(f"chronicles.path: file not found: {chron_path}")
    elif synth is None:
        chron_path = None  # simulation commands will reject the config

    structures_raw = raw.get("structures", [HD, DHD])
    if isinstance(structures_raw, str):
        structures_raw = [HD, DHD] if structures_raw == "both" else [structures_raw]
    structures = []
    for s in structures_raw:
        if s not in (HD, DHD):
            raise ConfigError(f"structures: unknown structure {s!r}")
        if s not in structures:
            structures.append(s)
    if not structures:
        raise ConfigError("structures: selection must be nonempty")

    seed = int(_num(raw, "seed", "config", default=0))
    toy_wphr = bool(raw.get("toy_wphr", False))
    verify_instances = int(_num(raw, "verify_instances", "config", default=100))
    output_dir = Path(raw.get("output_dir", "out"))
    if not output_dir.is_absolute():
        output_dir = base / output_dir

    return RunConfig(tl, model, grid, scen_path, chron_path, synth, seed,
                     tuple(structures), toy_wphr, output_dir, verify_instances)


def build_uncertainty(cfg: RunConfig) -> tuple[ScenarioSet, list[Chronicle]]:
    """Materialise scenario set and chronicles from files or the generator."""
    if cfg.synth is not None:
        scenarios, chronicles = synthesize_case_study(cfg.seed, cfg.synth)
        if cfg.scenarios_path is not None:
            scenarios = load_scenarios(cfg.scenarios_path, cfg.timeline,
                                       cfg.model.num_units)
        if cfg.chronicles_path is not None:
            chronicles = load_chronicles(cfg.chronicles_path, cfg.timeline,
                                         cfg.model.num_units)
        return scenarios, chronicles
    scenarios = load_scenarios(cfg.scenarios_path, cfg.timeline, cfg.model.num_units)
    chronicles = []
    if cfg.chronicles_path is not None:
        chronicles = load_chronicles(cfg.chronicles_path, cfg.timeline,
                                     cfg.model.num_units)
    return scenarios, chronicles
