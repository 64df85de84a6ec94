"""Randomized candidate search for the minimum-power certified precoder.

For each of zeta candidates: synthesize a URLLC channel from the history
statistics, build directions for the stacked channel matrix (URLLC column
first), draw a URLLC power-allocation target uniformly between the spectral
efficiency floor and the matched-beam upper bound, and solve the power
system.  Draws that break the power budget are retried up to a redraw cap.
Every feasible candidate is certified against the measurement history; the
winner is the certified candidate with the smallest total transmit power
(ties broken toward the earliest candidate index).

Candidate t consumes substreams child(SYNTHESIS, t) and child(TARGET, t, j)
for redraw j, so results are reproducible under any execution order and
candidate sets are nested as zeta grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .channel import NetworkRealization
from .config import ScenarioConfig
from .precoders import TPM, ZF, DirectionMatrix, tpm_directions_batch
from .power import PowerAllocation
from .stats import (
    OutageCertificate,
    certificate_batch,
    channel_stats,
    synthesize_channel,
)
from .rng import RandomStream


@dataclass
class CandidateSolution:
    """One fully-evaluated candidate (kept only when recording is requested)."""

    index: int
    synthesized_channel: np.ndarray
    direction_matrix: DirectionMatrix
    urllc_target: float
    allocation: PowerAllocation
    precoding_matrix: np.ndarray
    certificate: OutageCertificate
    redraws_used: int


@dataclass
class PrecoderSolution:
    """Search outcome: the certified minimum-power precoder, if any."""

    kind: str
    precoding_matrix: np.ndarray | None
    per_user_power_mw: np.ndarray | None
    total_power_mw: float
    t_opt: int
    urllc_target: float
    certificate: OutageCertificate | None
    candidates_evaluated: int
    candidates_feasible: int
    candidates_certified: int
    construction_failures: int
    redraws_exhausted: int
    candidates: list[CandidateSolution] | None = None

    @property
    def found(self) -> bool:
        return self.precoding_matrix is not None

    @property
    def candidates_skipped(self) -> int:
        return self.candidates_evaluated - self.candidates_feasible

    @property
    def urllc_power_mw(self) -> float:
        if self.per_user_power_mw is None:
            return float("nan")
        return float(self.per_user_power_mw[0])


def _solve_batch(systems: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Stacked linear solve with vector right-hand sides (T, n); singular
    slices come back as NaN rows."""
    try:
        return np.linalg.solve(systems, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(rhs.shape, np.nan)
        for j in range(systems.shape[0]):
            try:
                out[j] = np.linalg.solve(systems[j], rhs[j])
            except np.linalg.LinAlgError:
                pass
        return out


def run_algorithm1(
    realization: NetworkRealization,
    config: ScenarioConfig,
    kind: str,
    stream: RandomStream,
    record_candidates: bool = False,
) -> PrecoderSolution:
    """Full candidate search for one network realization.

    ``kind`` selects the direction construction: "zf" (target-independent,
    interference-nulling) or "tpm" (per-target power-minimizing directions,
    rebuilt for every target draw since the multipliers depend on it).
    """
    if kind not in (ZF, TPM):
        raise ValueError(f"unknown precoder kind: {kind!r}")
    if realization.embb_channels is None or realization.history is None:
        raise ValueError("realization is missing eMBB CSI or URLLC history")
    realization.validate()

    history = realization.history
    embb = realization.embb_channels
    m = realization.num_antennas
    n = realization.num_embb + 1
    zeta = config.num_candidates
    sigma2 = config.noise_power_mw
    p_max = config.max_power_mw
    embb_targets = np.asarray(config.embb_sinr_targets, dtype=float)
    gamma_floor = config.urllc_target_floor
    stats = channel_stats(history)

    synthesized = np.empty((zeta, m), dtype=complex)
    for t in range(zeta):
        gen = stream.child(rng.SYNTHESIS, t).generator()
        synthesized[t] = synthesize_channel(stats, gen)

    stacked = np.empty((zeta, m, n), dtype=complex)
    stacked[:, :, 0] = synthesized
    stacked[:, :, 1:] = embb.T[None, :, :]
    eval_channels = np.empty((zeta, n, m), dtype=complex)
    eval_channels[:, 0, :] = synthesized
    eval_channels[:, 1:, :] = embb[None, :, :]

    best_gain = np.einsum("tm,tm->t", synthesized.conj(), synthesized).real
    gamma_ceiling = p_max * best_gain / sigma2

    usable = gamma_ceiling > gamma_floor
    zf_norms = None
    directions = np.zeros((zeta, m, n), dtype=complex)
    multipliers = np.zeros((zeta, n))
    if kind == ZF:
        q, r = np.linalg.qr(stacked)
        diag = np.abs(np.einsum("tii->ti", r))
        dmin = diag.min(axis=1)
        dmax = diag.max(axis=1)
        cond_ok = (dmin > 0) & ((dmax / np.where(dmin > 0, dmin, 1.0)) ** 2 <= 1e12)
        usable &= cond_ok
        r_safe = r.copy()
        r_safe[~cond_ok] = np.eye(n)  # keep the stacked inverse nonsingular
        unnormalized = q @ np.linalg.inv(r_safe).conj().swapaxes(1, 2)
        zf_norms = np.sqrt(
            np.einsum("tmk,tmk->tk", unnormalized.conj(), unnormalized).real
        )
        directions = unnormalized / zf_norms[:, None, :]

    construction_failures = int(np.count_nonzero(~usable))

    pending = usable.copy()
    feasible = np.zeros(zeta, dtype=bool)
    drawn_target = np.full(zeta, np.nan)
    powers = np.full((zeta, n), np.nan)
    redraws_used = np.zeros(zeta, dtype=int)
    indices = np.arange(n)

    for round_idx in range(config.max_redraws):
        idx = np.flatnonzero(pending)
        if idx.size == 0:
            break
        draws = np.empty(idx.size)
        for j, t in enumerate(idx):
            gen = stream.child(rng.TARGET, int(t), round_idx).generator()
            if config.target_draw_db:
                draws[j] = 10.0 ** gen.uniform(
                    np.log10(gamma_floor), np.log10(gamma_ceiling[t])
                )
            else:
                draws[j] = gen.uniform(gamma_floor, gamma_ceiling[t])
        targets = np.empty((idx.size, n))
        targets[:, 0] = draws
        targets[:, 1:] = embb_targets[None, :]

        if kind == ZF:
            p_round = targets * (zf_norms[idx] ** 2) * sigma2
        else:
            dirs, lams, converged = tpm_directions_batch(
                stacked[idx], targets, sigma2, damping=config.tpm_damping
            )
            gains = np.abs(
                np.einsum("tkm,tmi->tki", eval_channels[idx].conj(), dirs)
            ) ** 2
            systems = -targets[:, :, None] * gains
            systems[:, indices, indices] = gains[:, indices, indices]
            p_round = _solve_batch(systems, targets * sigma2)
            p_round[~converged] = np.nan
            # a diverged construction invalidates the candidate outright
            diverged = idx[~converged]
            pending[diverged] = False
            construction_failures += diverged.size
            directions[idx[converged]] = dirs[converged]
            multipliers[idx[converged]] = lams[converged]

        ok = (
            np.all(np.isfinite(p_round), axis=1)
            & np.all(p_round > 0, axis=1)
            & (p_round.sum(axis=1) <= p_max)
        )
        accepted = idx[ok]
        feasible[accepted] = True
        pending[accepted] = False
        drawn_target[accepted] = draws[ok]
        powers[accepted] = p_round[ok]
        redraws_used[accepted] = round_idx
    redraws_exhausted = int(np.count_nonzero(pending))

    feasible_idx = np.flatnonzero(feasible)
    candidates_feasible = int(feasible_idx.size)

    solution = PrecoderSolution(
        kind=kind,
        precoding_matrix=None,
        per_user_power_mw=None,
        total_power_mw=float("nan"),
        t_opt=-1,
        urllc_target=float("nan"),
        certificate=None,
        candidates_evaluated=zeta,
        candidates_feasible=candidates_feasible,
        candidates_certified=0,
        construction_failures=construction_failures,
        redraws_exhausted=redraws_exhausted,
        candidates=[] if record_candidates else None,
    )
    if candidates_feasible == 0:
        return solution

    w_all = directions[feasible_idx] * np.sqrt(powers[feasible_idx])[:, None, :]
    mu_hat, s_hat, mu_ub, empirical = certificate_batch(
        history, w_all, config.urllc_sinr_target, config.chernoff_r,
        sigma2, config.confidence,
    )
    certified = mu_ub <= config.outage_target
    solution.candidates_certified = int(np.count_nonzero(certified))

    if record_candidates:
        solution.candidates = [
            _record(
                int(t), kind, synthesized, directions, multipliers, zf_norms,
                drawn_target, powers, p_max, w_all[j], mu_hat[j], s_hat[j],
                mu_ub[j], empirical[j], config, len(history), redraws_used,
            )
            for j, t in enumerate(feasible_idx)
        ]

    if solution.candidates_certified == 0:
        return solution

    totals = powers[feasible_idx].sum(axis=1)
    masked = np.where(certified, totals, np.inf)
    best_j = int(np.argmin(masked))  # argmin takes the first minimum: earliest t wins ties
    best_t = int(feasible_idx[best_j])

    solution.precoding_matrix = w_all[best_j]
    solution.per_user_power_mw = powers[best_t]
    solution.total_power_mw = float(totals[best_j])
    solution.t_opt = best_t
    solution.urllc_target = float(drawn_target[best_t])
    solution.certificate = OutageCertificate(
        mu_hat=float(mu_hat[best_j]),
        s_hat=float(s_hat[best_j]),
        mu_ub=float(mu_ub[best_j]),
        r_used=config.chernoff_r,
        dof=len(history) - 1,
        empirical_outage=float(empirical[best_j]),
    )
    return solution


def _record(
    t: int,
    kind: str,
    synthesized: np.ndarray,
    directions: np.ndarray,
    multipliers: np.ndarray,
    zf_norms: np.ndarray | None,
    drawn_target: np.ndarray,
    powers: np.ndarray,
    p_max: float,
    w: np.ndarray,
    mu_hat: float,
    s_hat: float,
    mu_ub: float,
    empirical: float,
    config: ScenarioConfig,
    history_len: int,
    redraws_used: np.ndarray,
) -> CandidateSolution:
    direction = DirectionMatrix(
        matrix=directions[t],
        kind=kind,
        column_norms=None if zf_norms is None else zf_norms[t],
        multipliers=multipliers[t] if kind == TPM else None,
    )
    total = float(powers[t].sum())
    allocation = PowerAllocation(
        powers_mw=powers[t], total_mw=total, feasible=bool(total <= p_max)
    )
    certificate = OutageCertificate(
        mu_hat=float(mu_hat), s_hat=float(s_hat), mu_ub=float(mu_ub),
        r_used=config.chernoff_r, dof=history_len - 1,
        empirical_outage=float(empirical),
    )
    return CandidateSolution(
        index=t,
        synthesized_channel=synthesized[t],
        direction_matrix=direction,
        urllc_target=float(drawn_target[t]),
        allocation=allocation,
        precoding_matrix=w,
        certificate=certificate,
        redraws_used=int(redraws_used[t]),
    )
