"""Command-line pipeline driver.

Subcommands:

    usagevalues solve    --config cfg.json [--out DIR] [--threads N]
                         [--structure hd|dhd|both] [--seed K]
    usagevalues simulate --config cfg.json [...]
    usagevalues verify   --config cfg.json [--seed K]
    usagevalues synth    --config cfg.json [--out DIR] [--seed K]

Exit codes: 0 success, 1 configuration or validation error, 2 property
violation (ordering or oracle mismatch), 3 solver failure. Every run writes
a manifest with the config hash, seed and tool version; outputs are
deterministic functions of (config, seed), independent of --threads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path


from . import __version__
from .campaign import oracle_equivalence_campaign, wphr_chain_check
from .config import RunConfig, build_uncertainty, load_config
from .errors import ConfigError, GuardExceeded, ScenarioFormatError, SolverFailure
from .policy_sim import aggregate_kpis, simulate_chronicle, write_kpi_csv, write_trace_csv
from .scenario_io import save_chronicles, save_scenarios
from .sdp import (DHD, HD, compare_tables, read_bellman_csv, solve_bellman_dhd,
                  solve_bellman_hd, write_bellman_csv, write_comparison_csv,
                  write_usage_csv)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VIOLATION = 2
EXIT_SOLVER = 3


def _write_manifest(cfg_path: Path, out_dir: Path, seed: int, command: str,
                    structures) -> None:
    digest = hashlib.sha256(Path(cfg_path).read_bytes()).hexdigest()
    manifest = {
        "command": command,
        "config_sha256": digest,
        "seed": seed,
        "structures": list(structures),
        "version": __version__,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _effective(cfg: RunConfig, args) -> tuple[int, tuple[str, ...], Path]:
    seed = cfg.seed if args.seed is None else args.seed
    if args.structure is None:
        structures = cfg.structures
    elif args.structure == "both":
        structures = (HD, DHD)
    else:
        structures = (args.structure,)
    out_dir = cfg.output_dir if args.out is None else Path(args.out)
    return seed, structures, out_dir


def _solve_tables(cfg: RunConfig, scenarios, structures, threads, out_dir,
                  reuse: bool):
    tables = {}
    for tag in structures:
        path = out_dir / f"bellman_{tag}.csv"
        if reuse and path.exists():
            tables[tag] = read_bellman_csv(path, tag)
            continue
        solver = solve_bellman_hd if tag == HD else solve_bellman_dhd
        tables[tag] = solver(cfg.model, scenarios, cfg.grid, cfg.timeline,
                             threads=threads)
        write_bellman_csv(tables[tag], path)
    return tables


def cmd_solve(cfg: RunConfig, cfg_path: Path, args) -> int:
    seed, structures, out_dir = _effective(cfg, args)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig(**{**cfg.__dict__, "seed": seed})
    scenarios, _ = build_uncertainty(cfg)
    tables = _solve_tables(cfg, scenarios, structures, args.threads, out_dir,
                           reuse=False)
    write_usage_csv(tables, out_dir / "usage_values.csv")
    status = EXIT_OK
    if HD in tables and DHD in tables:
        report = compare_tables(tables[HD], tables[DHD])
        write_comparison_csv(tables[HD], tables[DHD], report,
                             out_dir / "comparison.csv")
        print(f"max dhd-hd gap {report.max_gap:.6g} at week {report.max_gap_week}, "
              f"grid point {report.max_gap_index}")
        if not report.ok:
            for w, p, rel in report.violations[:10]:
                print(f"ordering violated at week {w}, point {p}: {rel:.3g}")
            status = EXIT_VIOLATION
    _write_manifest(cfg_path, out_dir, seed, "solve", structures)
    for tag in structures:
        print(f"wrote {out_dir / f'bellman_{tag}.csv'}")
    return status


def cmd_simulate(cfg: RunConfig, cfg_path: Path, args) -> int:
    seed, structures, out_dir = _effective(cfg, args)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig(**{**cfg.__dict__, "seed": seed})
    scenarios, chronicles = build_uncertainty(cfg)
    if not chronicles:
        raise ConfigError("simulate requires chronicles (path or synth source)")
    tables = _solve_tables(cfg, scenarios, structures, args.threads, out_dir,
                           reuse=True)
    x0 = cfg.model.initial_stock
    summaries = {}
    for tag in structures:
        traces = []
        for c, chron in enumerate(chronicles, start=1):
            trace = simulate_chronicle(cfg.model, tables[tag], scenarios, chron,
                                       x0, label=f"{tag}_chronicle_{c}")
            write_trace_csv(trace, c, cfg.model.storage,
                            out_dir / f"trace_{tag}_chronicle_{c}.csv")
            traces.append(trace)
        summaries[tag] = aggregate_kpis(traces)
        print(f"{tag}: mean cost {summaries[tag].total_cost:.6g}, "
              f"pump {summaries[tag].pump_volume:.6g}, "
              f"turb {summaries[tag].turb_volume:.6g}, "
              f"ens {summaries[tag].ens_volume:.6g}")
    write_kpi_csv(summaries, out_dir / "kpi_summary.csv")
    _write_manifest(cfg_path, out_dir, seed, "simulate", structures)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, cfg_path: Path, args) -> int:
    seed, _, out_dir = _effective(cfg, args)
    status = EXIT_OK

    report = oracle_equivalence_campaign(cfg.verify_instances, seed)
    print(f"oracle equivalence over {report.instances} instances: "
          f"max relative deviation hd {report.max_rel_dev_hd:.3g}, "
          f"dhd {report.max_rel_dev_dhd:.3g}")
    if not report.ok:
        for f in report.failures[:10]:
            print(f"FAIL {f}")
        status = EXIT_VIOLATION

    if cfg.toy_wphr:
        cfg = RunConfig(**{**cfg.__dict__, "seed": seed})
        scenarios, _ = build_uncertainty(cfg)
        chain = wphr_chain_check(cfg.model, scenarios, cfg.grid, cfg.timeline)
        print(f"information chain: min dhd-hd gap {chain.worst_hd_dhd:.3g}, "
              f"min wphr-dhd gap {chain.worst_dhd_wphr:.3g}")
        if not chain.ok:
            for f in chain.failures:
                print(f"FAIL {f}")
            status = EXIT_VIOLATION
    return status


def cmd_synth(cfg: RunConfig, cfg_path: Path, args) -> int:
    seed, _, out_dir = _effective(cfg, args)
    if cfg.synth is None:
        raise ConfigError("synth command needs a scenarios.synth block")
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = RunConfig(**{**cfg.__dict__, "seed": seed})
    scenarios, chronicles = build_uncertainty(cfg)
    save_scenarios(scenarios, out_dir / "scenarios.csv")
    save_chronicles(chronicles, out_dir / "chronicles.csv")
    _write_manifest(cfg_path, out_dir, seed, "synth", cfg.structures)
    print(f"wrote {out_dir / 'scenarios.csv'} and {out_dir / 'chronicles.csv'}")
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usagevalues",
        description="Weekly Bellman values and storage usage values under "
                    "hazard-decision and decision-hazard-decision structures.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap for grid sweeps (results identical)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--structure", choices=[HD, DHD, "both"], default=None,
                       help="information structure selection override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, Path(args.config), args)
    except (ConfigError, ScenarioFormatError, GuardExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
