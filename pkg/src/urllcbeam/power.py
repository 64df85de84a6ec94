"""SINR evaluation, the URLLC target draw, and per-user power allocation.

Given unit-norm directions and per-user SINR targets, the powers solve the
coupled linear system

    p_k |h_k^H u_k|^2 - gamma_k * sum_{i != k} p_i |h_k^H u_i|^2 = gamma_k * sigma^2

(one row per user, evaluated against that user's own channel).  A solution
with any non-positive component, or exceeding the power budget, flags the
allocation infeasible; the caller redraws the URLLC target rather than
aborting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .precoders import ZF, DirectionMatrix


@dataclass
class PowerAllocation:
    powers_mw: np.ndarray     # (K+1,)
    total_mw: float
    feasible: bool            # all powers > 0 and total <= budget


def sinr(channel: np.ndarray, precoder: np.ndarray, user: int, noise_power: float) -> float:
    """SINR of column ``user`` of the precoding matrix at the given channel."""
    channel = np.asarray(channel)
    precoder = np.asarray(precoder)
    if channel.shape[0] != precoder.shape[0]:
        raise ValueError("channel and precoder dimensions disagree")
    inner = np.abs(channel.conj() @ precoder) ** 2
    signal = inner[user]
    interference = inner.sum() - signal
    return float(signal / (interference + noise_power))


def gamma_max(channel: np.ndarray, p_max: float, noise_power: float) -> float:
    """Best-case SINR: full budget, matched beam, no interference."""
    norm_sq = float(np.linalg.norm(channel) ** 2)
    if norm_sq == 0:
        raise ValueError("zero channel vector")
    return p_max * norm_sq / noise_power


def draw_urllc_target(
    gamma_min: float,
    gamma_max_value: float,
    gen: np.random.Generator,
    log_domain: bool = False,
) -> float:
    """Uniform draw of the URLLC power-allocation target on [gamma_min, gamma_max].

    The draw is uniform in the linear SINR domain by default; ``log_domain``
    switches to uniform-in-dB (heavily favoring small targets).
    """
    if gamma_max_value <= gamma_min:
        raise ValueError("URLLC target infeasible even alone")
    if log_domain:
        return float(10.0 ** gen.uniform(np.log10(gamma_min), np.log10(gamma_max_value)))
    return float(gen.uniform(gamma_min, gamma_max_value))


def cross_gains(eval_channels: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Gain table g[k, i] = |h_k^H u_i|^2; row k uses user k's channel."""
    return np.abs(eval_channels.conj() @ directions) ** 2


def solve_power(
    eval_channels: np.ndarray,
    directions: DirectionMatrix,
    sinr_targets: np.ndarray,
    noise_power: float,
    p_max: float,
) -> PowerAllocation:
    """Powers meeting every SINR target exactly, with a feasibility verdict.

    ``eval_channels`` row k is the channel used to judge user k (row 0 the
    synthesized URLLC vector, rows 1..K the eMBB instantaneous CSI).  For
    zero-forcing directions the interference terms vanish and the solution
    reduces to the closed form p_k = gamma_k ||z_k||^2 sigma^2, which is used
    directly.
    """
    sinr_targets = np.asarray(sinr_targets, dtype=float)
    n = directions.num_users
    if eval_channels.shape != (n, directions.matrix.shape[0]):
        raise ValueError("eval_channels must have one row per user")
    if sinr_targets.shape != (n,):
        raise ValueError("need one SINR target per user")
    if np.any(sinr_targets <= 0):
        raise ValueError("SINR targets must be strictly positive")

    if directions.kind == ZF and directions.column_norms is not None:
        powers = sinr_targets * directions.column_norms**2 * noise_power
    else:
        gains = cross_gains(eval_channels, directions.matrix)
        system = -sinr_targets[:, None] * gains
        idx = np.arange(n)
        system[idx, idx] = gains[idx, idx]
        rhs = sinr_targets * noise_power
        try:
            powers = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            return PowerAllocation(np.full(n, np.nan), np.nan, False)
        residual = np.linalg.norm(system @ powers - rhs)
        scale = np.linalg.norm(system, ord="fro") * np.linalg.norm(powers) + np.linalg.norm(rhs)
        if not np.all(np.isfinite(powers)) or residual > 1e-8 * scale:
            return PowerAllocation(np.full(n, np.nan), np.nan, False)
    total = float(powers.sum())
    feasible = bool(np.all(powers > 0) and total <= p_max)
    return PowerAllocation(powers_mw=powers, total_mw=total, feasible=feasible)
