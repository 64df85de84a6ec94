"""Monte-Carlo outage estimation, ensemble statistics, and experiment sweeps.

The outage of a fixed precoder is estimated by drawing fresh true channels
for the URLLC user and counting SINR shortfalls.  Ensemble runs repeat the
whole pipeline over independent network realizations and summarize the
outage exponent log10(outage) by a Gaussian moment fit, from which a
confidence value (probability of meeting the target) is derived.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from . import rng
from .channel import build_realization, sample_rician
from .config import ScenarioConfig, db_to_linear, mw_to_dbm
from .rng import RandomStream
from .solver import run_algorithm1

_MC_BATCH = 1 << 16


@dataclass
class OutageEstimate:
    outage: float
    mc_samples: int
    failures: int

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.outage * (1.0 - self.outage) / self.mc_samples)


@dataclass
class EnsembleFit:
    """Gaussian moment fit of log10(outage) across network realizations."""

    mv: float                     # mean of log10(outage)
    sd: float                     # standard deviation of log10(outage)
    cv_percent: float             # confidence that outage <= target
    mc_percent: float             # empirical fraction with outage <= target
    realizations_used: int
    realizations_excluded: int    # zero MC failures: no finite log10
    realizations_infeasible: int  # no certified precoder found
    mean_power_dbm: float
    sd_power_dbm: float


@dataclass
class RealizationRecord:
    index: int
    certified: bool
    total_power_mw: float
    urllc_power_mw: float
    mu_ub: float
    outage: OutageEstimate | None


def outage_mc(
    precoder: np.ndarray,
    psi: float,
    kappa: float,
    num_antennas: int,
    sinr_target: float,
    noise_power: float,
    num_samples: int,
    stream: RandomStream,
) -> OutageEstimate:
    """Outage probability of the first column's user under fresh channels.

    Samples are drawn in fixed-size batches on per-batch substreams so the
    tally is independent of batch scheduling.
    """
    if num_samples < 1:
        raise ValueError("need at least one Monte-Carlo sample")
    failures = 0
    done = 0
    batch_index = 0
    while done < num_samples:
        size = min(_MC_BATCH, num_samples - done)
        gen = stream.child(rng.MONTE_CARLO, batch_index).generator()
        channels = sample_rician(psi, kappa, num_antennas, gen, size=size)
        inner = np.abs(channels.conj() @ precoder) ** 2
        sinr = inner[:, 0] / (inner[:, 1:].sum(axis=1) + noise_power)
        failures += int(np.count_nonzero(sinr < sinr_target))
        done += size
        batch_index += 1
    return OutageEstimate(
        outage=failures / num_samples, mc_samples=num_samples, failures=failures
    )


def confidence_value(outage_target: float, mv: float, sd: float) -> float:
    """Percent confidence that log10(outage) stays below log10(target).

    The target enters on the log10 scale, matching the fitted exponent
    distribution.  A degenerate fit (sd == 0) gives 100 or 0.
    """
    threshold = math.log10(outage_target)
    if sd < 0:
        raise ValueError("standard deviation must be non-negative")
    if sd == 0.0:
        return 100.0 if mv <= threshold else 0.0
    return float(ndtr((threshold - mv) / sd) * 100.0)


def fit_log10_outage(outages: Sequence[float]) -> tuple[float, float, int, int]:
    """Moment fit of log10(outage): (mv, sd, used, excluded_zero)."""
    values = np.asarray(list(outages), dtype=float)
    positive = values[values > 0]
    excluded = int(values.size - positive.size)
    if positive.size == 0:
        return float("nan"), float("nan"), 0, excluded
    exponents = np.log10(positive)
    mv = float(exponents.mean())
    sd = float(exponents.std(ddof=1)) if exponents.size > 1 else 0.0
    return mv, sd, int(positive.size), excluded


def evaluate_realization(
    config: ScenarioConfig,
    index: int,
    kind: str,
    mc_samples: int | None = None,
) -> RealizationRecord:
    """Build realization ``index``, run the search, and MC-check the winner."""
    stream = RandomStream(config.rng_seed).child(index)
    realization = build_realization(config, stream)
    solution = run_algorithm1(realization, config, kind, stream)
    if not solution.found:
        return RealizationRecord(
            index=index, certified=False, total_power_mw=float("nan"),
            urllc_power_mw=float("nan"), mu_ub=float("nan"), outage=None,
        )
    estimate = outage_mc(
        solution.precoding_matrix,
        realization.psi_urllc,
        realization.kappa_urllc,
        realization.num_antennas,
        config.urllc_sinr_target,
        config.noise_power_mw,
        mc_samples or config.mc_samples,
        stream,
    )
    return RealizationRecord(
        index=index,
        certified=True,
        total_power_mw=solution.total_power_mw,
        urllc_power_mw=solution.urllc_power_mw,
        mu_ub=solution.certificate.mu_ub,
        outage=estimate,
    )


def _worker(args: tuple[ScenarioConfig, int, str, int | None]) -> RealizationRecord:
    return evaluate_realization(*args)


def ensemble_run(
    config: ScenarioConfig,
    num_realizations: int,
    kind: str,
    mc_samples: int | None = None,
    workers: int = 1,
) -> tuple[EnsembleFit, list[RealizationRecord]]:
    """Statistics over independently redrawn network realizations.

    Realization i draws all randomness from substreams keyed by i, so the
    result set is identical for any worker count.
    """
    if num_realizations < 2:
        raise ValueError("need at least 2 realizations for ensemble statistics")
    tasks = [(config, i, kind, mc_samples) for i in range(num_realizations)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_worker, tasks, chunksize=8))
    else:
        records = [_worker(t) for t in tasks]
    records.sort(key=lambda rec: rec.index)
    return summarize_ensemble(config, records), records


def summarize_ensemble(
    config: ScenarioConfig, records: Iterable[RealizationRecord]
) -> EnsembleFit:
    records = list(records)
    certified = [rec for rec in records if rec.certified]
    infeasible = len(records) - len(certified)
    if not certified:
        raise RuntimeError(
            f"no realization produced a certified precoder "
            f"({infeasible} infeasible of {len(records)})"
        )
    outages = [rec.outage.outage for rec in certified]
    mv, sd, used, excluded = fit_log10_outage(outages)
    cv = confidence_value(config.outage_target, mv, sd) if used else float("nan")
    mc_pct = 100.0 * float(
        np.mean([o <= config.outage_target for o in outages])
    )
    power_dbm = np.array([mw_to_dbm(rec.total_power_mw) for rec in certified])
    return EnsembleFit(
        mv=mv,
        sd=sd,
        cv_percent=cv,
        mc_percent=mc_pct,
        realizations_used=used,
        realizations_excluded=excluded,
        realizations_infeasible=infeasible,
        mean_power_dbm=float(power_dbm.mean()),
        sd_power_dbm=float(power_dbm.std(ddof=1)) if len(power_dbm) > 1 else 0.0,
    )


SWEEP_AXES = ("r", "zeta", "kappa0", "history_len", "num_embb", "embb_sinr_target_db")


@dataclass
class SweepRow:
    axis: str
    axis_value: float
    precoder: str
    certified_found: bool
    outage: OutageEstimate | None
    total_power_mw: float
    urllc_power_mw: float
    mu_ub: float
    candidates_feasible: int
    candidates_certified: int
    candidates_skipped: int


def _config_for_axis(config: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    if axis == "r":
        return config.with_overrides(chernoff_r=float(value))
    if axis == "zeta":
        return config.with_overrides(num_candidates=int(value))
    if axis == "kappa0":
        return config.with_overrides(rician_k_urllc=float(value))
    if axis == "history_len":
        return config.with_overrides(history_len=int(value))
    if axis == "num_embb":
        k = int(value)
        targets = set(config.embb_sinr_targets)
        if len(targets) > 1:
            raise ValueError("num_embb sweep needs a uniform eMBB SINR target")
        target = targets.pop() if targets else 10.0
        return config.with_overrides(num_embb=k, embb_sinr_targets=(target,) * k)
    if axis == "embb_sinr_target_db":
        lin = db_to_linear(float(value))
        return config.with_overrides(embb_sinr_targets=(lin,) * config.num_embb)
    raise ValueError(f"unknown sweep axis {axis!r}; valid: {SWEEP_AXES}")


def sweep(
    config: ScenarioConfig,
    axis: str,
    values: Sequence[float],
    kind: str,
    mc_samples: int | None = None,
) -> list[SweepRow]:
    """One row per axis value on a single fixed network realization.

    The deployment, CSI, history, and candidate substreams are shared across
    axis values (regenerated only where the swept parameter enters their
    law), so differences along the axis reflect the parameter, not fresh
    randomness.  Candidate streams are nested in zeta by construction.
    """
    rows: list[SweepRow] = []
    base_stream = RandomStream(config.rng_seed).child(0)
    for value in values:
        cfg = _config_for_axis(config, axis, value)
        realization = build_realization(cfg, base_stream)
        solution = run_algorithm1(realization, cfg, kind, base_stream)
        if solution.found:
            estimate = outage_mc(
                solution.precoding_matrix,
                realization.psi_urllc,
                realization.kappa_urllc,
                realization.num_antennas,
                cfg.urllc_sinr_target,
                cfg.noise_power_mw,
                mc_samples or cfg.mc_samples,
                base_stream,
            )
        else:
            estimate = None
        rows.append(
            SweepRow(
                axis=axis,
                axis_value=float(value),
                precoder=kind,
                certified_found=solution.found,
                outage=estimate,
                total_power_mw=solution.total_power_mw,
                urllc_power_mw=solution.urllc_power_mw,
                mu_ub=solution.certificate.mu_ub if solution.found else float("nan"),
                candidates_feasible=solution.candidates_feasible,
                candidates_certified=solution.candidates_certified,
                candidates_skipped=solution.candidates_skipped,
            )
        )
    return rows


def default_workers() -> int:
    value = os.environ.get("URLLCBEAM_THREADS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1
