"""Command-line interface: solve one scenario, sweep a parameter, or run an
ensemble, emitting JSON/CSV reports plus a manifest for reproducibility.

Exit codes: 0 success, 2 configuration error, 3 no certified precoder,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from .config import (
    ConfigError,
    ScenarioConfig,
    linear_to_db,
    load_config,
    mw_to_dbm,
)
from .channel import build_realization
from .evaluation import SWEEP_AXES, default_workers, ensemble_run, sweep
from .rng import RandomStream
from .solver import run_algorithm1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_SOLUTION = 3
EXIT_NUMERICAL = 4

SWEEP_CSV_HEADER = (
    "axis,axis_value,precoder,outage,outage_se,total_power_dbm,urllc_power_dbm,"
    "feasible,certified,candidates_skipped"
)
ENSEMBLE_CSV_HEADER = (
    "realization,seed,outage,total_power_dbm,urllc_power_dbm,mu_ub,certified"
)
TABLE_CSV_HEADER = (
    "precoder,kappa0,history_len,num_antennas,realizations_used,mv,sd,"
    "cv_percent,mc_percent,mean_total_power_dbm"
)


def _dbm_or_blank(value_mw: float) -> str:
    if value_mw is None or not math.isfinite(value_mw) or value_mw <= 0:
        return ""
    return f"{mw_to_dbm(value_mw):.4f}"


def _write_manifest(
    out_dir: Path,
    command: str,
    config: ScenarioConfig,
    outputs: list[str],
    wall_time_s: float,
    counters: dict[str, Any],
) -> str:
    manifest = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.content_hash(),
        "seed": config.rng_seed,
        "outputs": outputs,
        "wall_time_s": wall_time_s,
        "counters": counters,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest["config_hash"]


def _resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    if args.config:
        config = load_config(args.config)
    else:
        config = ScenarioConfig()
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "num_candidates", None) is not None:
        overrides["num_candidates"] = args.num_candidates
    if getattr(args, "mc_samples", None) is not None:
        overrides["mc_samples"] = args.mc_samples
    if overrides:
        config = config.with_overrides(**overrides)
    return config


def cmd_solve(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.time()
    stream = RandomStream(config.rng_seed).child(0)
    realization = build_realization(config, stream)
    solution = run_algorithm1(realization, config, args.precoder, stream)
    wall = time.time() - start

    counters = {
        "candidates_evaluated": solution.candidates_evaluated,
        "candidates_feasible": solution.candidates_feasible,
        "candidates_certified": solution.candidates_certified,
        "construction_failures": solution.construction_failures,
        "redraws_exhausted": solution.redraws_exhausted,
    }
    config_hash = _write_manifest(
        out_dir, "solve", config, ["solution.json"], wall, counters
    )
    report: dict[str, Any] = {
        "manifest_hash": config_hash,
        "precoder": args.precoder,
        "certified": solution.found,
        "counters": counters,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if solution.found:
        report.update(
            {
                "t_opt": solution.t_opt,
                "total_power_dbm": mw_to_dbm(solution.total_power_mw),
                "urllc_power_dbm": mw_to_dbm(solution.urllc_power_mw),
                "per_user_power_dbm": [
                    mw_to_dbm(p) for p in solution.per_user_power_mw
                ],
                "urllc_target_db": linear_to_db(solution.urllc_target),
                "certificate": {
                    "mu_hat": solution.certificate.mu_hat,
                    "s_hat": solution.certificate.s_hat,
                    "mu_ub": solution.certificate.mu_ub,
                    "r": solution.certificate.r_used,
                    "dof": solution.certificate.dof,
                    "empirical_outage": solution.certificate.empirical_outage,
                },
            }
        )
    (out_dir / "solution.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report, indent=2))
    if not solution.found:
        print("no certified candidate at this zeta and r", file=sys.stderr)
        return EXIT_NO_SOLUTION
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    values = [float(v) for v in args.values.split(",")]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.time()
    rows = sweep(config, args.axis, values, args.precoder)
    wall = time.time() - start
    csv_name = f"sweep_{args.axis}.csv"
    counters = {"rows": len(rows)}
    config_hash = _write_manifest(out_dir, "sweep", config, [csv_name], wall, counters)
    path = out_dir / csv_name
    with path.open("w", newline="") as fh:
        fh.write(f"# manifest={config_hash}\n")
        fh.write(SWEEP_CSV_HEADER + "\n")
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(
                [
                    row.axis,
                    f"{row.axis_value:g}",
                    row.precoder,
                    f"{row.outage.outage:.8g}" if row.outage else "",
                    f"{row.outage.standard_error:.4g}" if row.outage else "",
                    _dbm_or_blank(row.total_power_mw),
                    _dbm_or_blank(row.urllc_power_mw),
                    row.candidates_feasible,
                    row.candidates_certified,
                    row.candidates_skipped,
                ]
            )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_ensemble(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = args.threads or default_workers()
    start = time.time()
    fit, records = ensemble_run(
        config, args.realizations, args.precoder, workers=workers
    )
    wall = time.time() - start
    outputs = ["ensemble.csv", "ensemble_summary.json"]
    counters = {
        "realizations": args.realizations,
        "realizations_used": fit.realizations_used,
        "realizations_excluded": fit.realizations_excluded,
        "realizations_infeasible": fit.realizations_infeasible,
    }
    config_hash = _write_manifest(out_dir, "ensemble", config, outputs, wall, counters)
    path = out_dir / "ensemble.csv"
    with path.open("w", newline="") as fh:
        fh.write(f"# manifest={config_hash}\n")
        fh.write(ENSEMBLE_CSV_HEADER + "\n")
        writer = csv.writer(fh)
        for rec in records:
            writer.writerow(
                [
                    rec.index,
                    config.rng_seed,
                    f"{rec.outage.outage:.8g}" if rec.outage else "",
                    _dbm_or_blank(rec.total_power_mw),
                    _dbm_or_blank(rec.urllc_power_mw),
                    f"{rec.mu_ub:.8g}" if rec.certified else "",
                    int(rec.certified),
                ]
            )
    summary = {
        "manifest_hash": config_hash,
        "precoder": args.precoder,
        "mv": fit.mv,
        "sd": fit.sd,
        "cv_percent": fit.cv_percent,
        "mc_percent": fit.mc_percent,
        "realizations_used": fit.realizations_used,
        "realizations_excluded": fit.realizations_excluded,
        "realizations_infeasible": fit.realizations_infeasible,
        "mean_power_dbm": fit.mean_power_dbm,
        "sd_power_dbm": fit.sd_power_dbm,
        "outage_target": config.outage_target,
    }
    (out_dir / "ensemble_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_reproduce_table3(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    realizations = 5000 if args.full_scale else args.realizations
    mc_samples = 1_000_000 if args.full_scale else config.mc_samples
    workers = args.threads or default_workers()
    start = time.time()
    lines = []
    for precoder in ("zf", "tpm"):
        for kappa0 in (0.0, 2.0, 5.0):
            for history_len in (250, 500):
                for num_antennas in (8, 16):
                    cell = config.with_overrides(
                        rician_k_urllc=kappa0,
                        history_len=history_len,
                        num_antennas=num_antennas,
                        mc_samples=mc_samples,
                    )
                    fit, _ = ensemble_run(
                        cell, realizations, precoder, workers=workers
                    )
                    lines.append(
                        f"{precoder},{kappa0:g},{history_len},{num_antennas},"
                        f"{fit.realizations_used},{fit.mv:.4f},{fit.sd:.4f},"
                        f"{fit.cv_percent:.2f},{fit.mc_percent:.2f},"
                        f"{fit.mean_power_dbm:.2f}"
                    )
                    print(lines[-1])
    wall = time.time() - start
    config_hash = _write_manifest(
        out_dir, "reproduce-table3", config, ["table3.csv"], wall,
        {"realizations": realizations, "cells": len(lines)},
    )
    path = out_dir / "table3.csv"
    with path.open("w") as fh:
        fh.write(f"# manifest={config_hash}\n")
        fh.write(TABLE_CSV_HEADER + "\n")
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urllcbeam",
        description=(
            "Minimum-power downlink precoding for one history-only URLLC user "
            "coexisting with instantaneous-CSI eMBB users"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (defaults otherwise)")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument(
            "--precoder", choices=("zf", "tpm"), default="zf",
            help="direction construction (default zf)",
        )
        p.add_argument("--out-dir", default="runs", help="output directory")
        p.add_argument(
            "--threads", type=int, default=None,
            help="parallel workers (default: URLLCBEAM_THREADS or CPU count)",
        )
        p.add_argument(
            "--num-candidates", type=int, default=None,
            help="override the candidate count",
        )
        p.add_argument(
            "--mc-samples", type=int, default=None,
            help="override the Monte-Carlo depth",
        )
        p.add_argument(
            "--full-scale", action="store_true",
            help="publication-scale settings (hours of runtime)",
        )

    p_solve = sub.add_parser("solve", help="solve one scenario")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter on a fixed realization")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated axis values"
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_ens = sub.add_parser("ensemble", help="statistics over network realizations")
    common(p_ens)
    p_ens.add_argument("--realizations", type=int, default=500)
    p_ens.set_defaults(func=cmd_ensemble)

    p_tab = sub.add_parser(
        "reproduce-table3",
        help="ensemble summary grid over precoder, LOS factor, history length, antennas",
    )
    common(p_tab)
    p_tab.add_argument("--realizations", type=int, default=150)
    p_tab.set_defaults(func=cmd_reproduce_table3)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
