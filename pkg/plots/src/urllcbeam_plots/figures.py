"""Figure builders over the solver CLI's published CSV/JSON outputs.

Each figure id maps to the file(s) it consumes inside the input directory
and a builder that returns a matplotlib Figure plus a metadata dict (axis
ranges, overlay parameters).  Rendering is a pure function of the input
files: identical inputs give byte-identical SVG output.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "urllcbeam-plots"

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """Input file missing, empty, or lacking a required column."""


SWEEP_COLUMNS = [
    "axis", "axis_value", "precoder", "outage", "outage_se",
    "total_power_dbm", "urllc_power_dbm", "feasible", "certified",
    "candidates_skipped",
]
ENSEMBLE_COLUMNS = [
    "realization", "seed", "outage", "total_power_dbm", "urllc_power_dbm",
    "mu_ub", "certified",
]


@dataclass
class FigureSpec:
    figure_id: str
    inputs: tuple[str, ...]
    builder: Callable[["FigureSpec", Path], tuple[plt.Figure, dict]]
    log_y: bool = False
    title: str = ""


def read_csv(path: Path, required: list[str]) -> list[dict[str, str]]:
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    with path.open() as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    header = reader.fieldnames or []
    for column in required:
        if column not in header:
            raise SchemaError(f"{path.name}: missing column {column!r}")
    records = list(reader)
    if not records:
        raise SchemaError(f"{path.name}: no data rows")
    return records


def read_summary(path: Path) -> dict:
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    return json.loads(path.read_text())


def _floats(rows: list[dict[str, str]], column: str) -> np.ndarray:
    return np.array([float(r[column]) if r[column] != "" else np.nan for r in rows])


def _group_by_precoder(rows: list[dict[str, str]]):
    order: list[str] = []
    for row in rows:
        if row["precoder"] not in order:
            order.append(row["precoder"])
    return [(name, [r for r in rows if r["precoder"] == name]) for name in order]


def _new_axes():
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _outage_vs_axis(spec: FigureSpec, in_dir: Path, xlabel: str,
                    x_transform=lambda v, meta: v) -> tuple[plt.Figure, dict]:
    rows = read_csv(in_dir / spec.inputs[0], SWEEP_COLUMNS)
    meta = _manifest_config(in_dir)
    fig, ax = _new_axes()
    for name, group in _group_by_precoder(rows):
        x = x_transform(_floats(group, "axis_value"), meta)
        y = _floats(group, "outage")
        shown = y > 0  # zero estimates sit below the Monte-Carlo resolution
        ax.semilogy(x[shown], y[shown], marker="o", label=name)
    target = meta.get("outage_target")
    if target:
        ax.axhline(target, color="k", linestyle="--", linewidth=1,
                   label=f"target {target:g}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("outage probability")
    ax.legend()
    return fig, {"rows": len(rows), "target": target}


def _power_vs_axis(spec: FigureSpec, in_dir: Path, xlabel: str,
                   include_urllc: bool = False, log_x: bool = False) -> tuple[plt.Figure, dict]:
    rows = read_csv(in_dir / spec.inputs[0], SWEEP_COLUMNS)
    fig, ax = _new_axes()
    for name, group in _group_by_precoder(rows):
        x = _floats(group, "axis_value")
        ax.plot(x, _floats(group, "total_power_dbm"), marker="o", label=f"{name} total")
        if include_urllc:
            ax.plot(x, _floats(group, "urllc_power_dbm"), marker="s",
                    linestyle="--", label=f"{name} low-latency user")
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("transmit power [dBm]")
    ax.legend()
    return fig, {"rows": len(rows)}


def _manifest_config(in_dir: Path) -> dict:
    manifest = in_dir / "manifest.json"
    if manifest.exists():
        return json.loads(manifest.read_text()).get("config", {})
    return {}


def _histogram_with_gaussian(values: np.ndarray, mean: float, sd: float,
                             xlabel: str) -> tuple[plt.Figure, dict]:
    fig, ax = _new_axes()
    bins = max(10, int(math.sqrt(values.size)))
    ax.hist(values, bins=bins, density=True, alpha=0.55, label="empirical")
    if sd > 0:
        grid = np.linspace(values.min() - 2 * sd, values.max() + 2 * sd, 400)
        pdf = np.exp(-0.5 * ((grid - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
        ax.plot(grid, pdf, "r-", label="normal fit")
    else:
        ax.axvline(mean, color="r", label="normal fit (degenerate)")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    ax.legend()
    return fig, {"overlay_mean": mean, "overlay_sd": sd, "samples": int(values.size)}


def build_fig2a(spec, in_dir):
    return _outage_vs_axis(spec, in_dir, "exponential-bound variable r")


def build_fig2b(spec, in_dir):
    return _power_vs_axis(spec, in_dir, "exponential-bound variable r")


def build_fig3(spec, in_dir):
    def scale(values, meta):
        return values * meta.get("outage_target", 1.0)

    return _outage_vs_axis(spec, in_dir, "history length x outage target",
                           x_transform=scale)


def build_fig4a(spec, in_dir):
    return _outage_vs_axis(spec, in_dir, "line-of-sight factor")


def build_fig4b(spec, in_dir):
    return _power_vs_axis(spec, in_dir, "line-of-sight factor", include_urllc=True)


def build_fig6(spec, in_dir):
    return _power_vs_axis(spec, in_dir, "candidate count", log_x=True)


def build_fig7a(spec, in_dir):
    return _outage_vs_axis(spec, in_dir, "broadband users served")


def build_fig7b(spec, in_dir):
    return _power_vs_axis(spec, in_dir, "broadband users served")


def build_fig8a(spec, in_dir):
    return _outage_vs_axis(spec, in_dir, "broadband SINR target [dB]")


def build_fig8b(spec, in_dir):
    return _power_vs_axis(spec, in_dir, "broadband SINR target [dB]", include_urllc=True)


def build_fig9(spec, in_dir):
    rows = read_csv(in_dir / "ensemble.csv", ENSEMBLE_COLUMNS)
    summary = read_summary(in_dir / "ensemble_summary.json")
    powers = _floats(rows, "total_power_dbm")
    powers = powers[np.isfinite(powers)]
    if powers.size == 0:
        raise SchemaError("ensemble.csv: no certified realizations to plot")
    return _histogram_with_gaussian(
        powers, summary["mean_power_dbm"], summary["sd_power_dbm"],
        "total transmit power [dBm]",
    )


def build_fig10(spec, in_dir):
    rows = read_csv(in_dir / "ensemble.csv", ENSEMBLE_COLUMNS)
    summary = read_summary(in_dir / "ensemble_summary.json")
    outages = _floats(rows, "outage")
    outages = outages[np.isfinite(outages) & (outages > 0)]
    if outages.size == 0:
        raise SchemaError("ensemble.csv: no realizations with nonzero outage")
    fig, meta = _histogram_with_gaussian(
        np.log10(outages), summary["mv"], summary["sd"],
        "log10 outage probability",
    )
    target = summary.get("outage_target")
    if target:
        fig.axes[0].axvline(math.log10(target), color="k", linestyle="--",
                            linewidth=1)
    return fig, meta


FIGURES: dict[str, FigureSpec] = {
    "fig2a": FigureSpec("fig2a", ("sweep_r.csv",), build_fig2a),
    "fig2b": FigureSpec("fig2b", ("sweep_r.csv",), build_fig2b),
    "fig3": FigureSpec("fig3", ("sweep_history_len.csv",), build_fig3),
    "fig4a": FigureSpec("fig4a", ("sweep_kappa0.csv",), build_fig4a),
    "fig4b": FigureSpec("fig4b", ("sweep_kappa0.csv",), build_fig4b),
    "fig6": FigureSpec("fig6", ("sweep_zeta.csv",), build_fig6),
    "fig7a": FigureSpec("fig7a", ("sweep_num_embb.csv",), build_fig7a),
    "fig7b": FigureSpec("fig7b", ("sweep_num_embb.csv",), build_fig7b),
    "fig8a": FigureSpec("fig8a", ("sweep_embb_sinr_target_db.csv",), build_fig8a),
    "fig8b": FigureSpec("fig8b", ("sweep_embb_sinr_target_db.csv",), build_fig8b),
    "fig9": FigureSpec("fig9", ("ensemble.csv", "ensemble_summary.json"), build_fig9),
    "fig10": FigureSpec("fig10", ("ensemble.csv", "ensemble_summary.json"), build_fig10),
}


def build_figure(figure_id: str, in_dir: Path) -> tuple[plt.Figure, dict]:
    if figure_id not in FIGURES:
        raise SchemaError(
            f"unknown figure id {figure_id!r}; known: {sorted(FIGURES)}"
        )
    spec = FIGURES[figure_id]
    return spec.builder(spec, Path(in_dir))


def render(figure_id: str, in_dir: Path, out_file: Path) -> dict:
    """Build and write one figure; nothing is written if building fails."""
    fig, meta = build_figure(figure_id, Path(in_dir))
    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_file, metadata=_stable_metadata(out_file))
    plt.close(fig)
    return meta


def _stable_metadata(out_file: Path) -> dict | None:
    if out_file.suffix.lower() == ".svg":
        return {"Date": None}
    if out_file.suffix.lower() == ".png":
        return {"Software": None}
    return None
