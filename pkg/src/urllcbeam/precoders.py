"""Normalized precoding directions: zero-forcing, SINR-constrained power
minimization (TPM), and maximum ratio transmission.

All constructors take an M x (K+1) channel matrix whose first column belongs
to the URLLC user and return unit-norm direction columns; power allocation is
a separate step (see :mod:`urllcbeam.power`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZF = "zf"
TPM = "tpm"
MRT = "mrt"

_COND_LIMIT = 1e12          # on H^H H; beyond this the candidate is unusable
_TPM_TOL = 1e-10
_TPM_MAX_ITERATIONS = 500


@dataclass
class DirectionMatrix:
    """Unit-norm precoding directions, one column per user."""

    matrix: np.ndarray                      # (M, K+1), columns have unit norm
    kind: str
    column_norms: np.ndarray | None = None  # ZF: norms of the unnormalized columns
    multipliers: np.ndarray | None = None   # TPM: converged Lagrange multipliers
    iterations: int = 0

    @property
    def num_users(self) -> int:
        return self.matrix.shape[1]


def mrt_direction(channel: np.ndarray) -> np.ndarray:
    """Matched direction h / ||h||."""
    norm = np.linalg.norm(channel)
    if norm == 0:
        raise ValueError("cannot normalize a zero channel vector")
    return channel / norm


def zf_directions(channels: np.ndarray) -> DirectionMatrix:
    """Zero-forcing directions from the channel pseudo-inverse.

    Computed via a QR factorization (H = QR  =>  H (H^H H)^{-1} = Q R^{-H})
    rather than forming H^H H explicitly, for conditioning.
    """
    channels = np.asarray(channels)
    m, n = channels.shape
    if n > m:
        raise ValueError(f"zero-forcing needs K+1 <= M, got {n} users on {m} antennas")
    q, r = np.linalg.qr(channels)
    diag = np.abs(np.diag(r))
    if diag.min() == 0.0 or (diag.max() / diag.min()) ** 2 > _COND_LIMIT:
        raise ValueError("ill-conditioned channel")
    unnormalized = q @ np.linalg.inv(r).conj().T
    norms = np.linalg.norm(unnormalized, axis=0)
    return DirectionMatrix(
        matrix=unnormalized / norms, kind=ZF, column_norms=norms,
    )


def tpm_directions(
    channels: np.ndarray,
    sinr_targets: np.ndarray,
    noise_power: float,
    tol: float = _TPM_TOL,
    max_iterations: int = _TPM_MAX_ITERATIONS,
    damping: float = 1.0,
) -> DirectionMatrix:
    """Power-minimizing directions for per-user SINR targets.

    The direction of user k is the regularized match

        u_k  proportional to  (I + sum_i lambda_i/sigma^2 h_i h_i^H)^{-1} h_k,

    with multipliers lambda solved from their fixed point.  Plain repeated
    substitution of the multiplier equation converges too slowly at large
    targets (and hits a float cancellation floor), so each sweep alternates
    the closed-form step for fixed directions: recompute directions at the
    current lambda, then solve the small linear system that makes every
    virtual-uplink SINR hit its target for those fixed directions.  The
    fixed point is unchanged and is verified on exit.
    """
    channels = np.asarray(channels)
    m, n = channels.shape
    sinr_targets = np.asarray(sinr_targets, dtype=float)
    if sinr_targets.shape != (n,):
        raise ValueError("need one SINR target per user")
    if np.any(sinr_targets <= 0):
        raise ValueError("SINR targets must be strictly positive")
    norms_sq = np.linalg.norm(channels, axis=0) ** 2
    if np.any(norms_sq == 0):
        raise ValueError("zero channel vector")

    lam = noise_power * sinr_targets / norms_sq
    identity = np.eye(m, dtype=complex)
    indices = np.arange(n)
    for iteration in range(max_iterations):
        regularized = identity + (channels * (lam / noise_power)) @ channels.conj().T
        filtered = np.linalg.solve(regularized, channels)
        directions = filtered / np.linalg.norm(filtered, axis=0)
        gains = np.abs(directions.conj().T @ channels) ** 2   # rows: user k's direction
        system = -sinr_targets[:, None] * gains
        system[indices, indices] = gains[indices, indices]
        try:
            lam_next = np.linalg.solve(system, sinr_targets * noise_power)
        except np.linalg.LinAlgError:
            lam_next = np.full(n, np.nan)
        if not np.all(np.isfinite(lam_next)) or np.any(lam_next <= 0):
            # targets are infeasible for the current fixed receivers (early
            # sweeps at extreme targets); the plain substitution step is
            # always positive and shares the fixed point
            quad = np.einsum("mk,mk->k", channels.conj(), filtered).real
            lam_next = noise_power / ((1.0 + 1.0 / sinr_targets) * quad)
        if damping != 1.0:
            lam_next = lam + damping * (lam_next - lam)
        change = np.max(np.abs(lam_next - lam) / lam)
        lam = lam_next
        if change < tol:
            break
    else:
        raise RuntimeError("TPM fixed point diverged")

    # rebuild directions at the converged multipliers and verify the fixed point
    regularized = identity + (channels * (lam / noise_power)) @ channels.conj().T
    filtered = np.linalg.solve(regularized, channels)
    directions = filtered / np.linalg.norm(filtered, axis=0)
    quad = np.einsum("mk,mk->k", channels.conj(), filtered).real
    residual = np.abs(noise_power / ((1.0 + 1.0 / sinr_targets) * quad) - lam) / lam
    if residual.max() > 1e-8:
        raise RuntimeError("TPM fixed point diverged")
    return DirectionMatrix(
        matrix=directions, kind=TPM, multipliers=lam, iterations=iteration + 1,
    )


def tpm_directions_batch(
    channels: np.ndarray,
    sinr_targets: np.ndarray,
    noise_power: float,
    tol: float = _TPM_TOL,
    max_iterations: int = _TPM_MAX_ITERATIONS,
    damping: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`tpm_directions` over a stack of problems.

    ``channels``: (T, M, K+1); ``sinr_targets``: (T, K+1).  Returns
    (directions (T, M, K+1), multipliers (T, K+1), converged mask (T,)).
    Each problem is frozen at its own convergence point, so results match
    the per-problem solver.
    """
    total, m, n = channels.shape
    targets = np.asarray(sinr_targets, dtype=float)
    norms_sq = np.einsum("tmk,tmk->tk", channels.conj(), channels).real
    lam = noise_power * targets / norms_sq
    identity = np.eye(m, dtype=complex)
    indices = np.arange(n)
    active = np.ones(total, dtype=bool)
    for _ in range(max_iterations):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ch = channels[idx]
        la = lam[idx]
        tg = targets[idx]
        regularized = identity + np.einsum(
            "tmk,tnk->tmn", ch * (la / noise_power)[:, None, :], ch.conj()
        )
        filtered = np.linalg.solve(regularized, ch)
        col_norms = np.sqrt(np.einsum("tmk,tmk->tk", filtered.conj(), filtered).real)
        directions = filtered / col_norms[:, None, :]
        gains = np.abs(np.einsum("tmk,tmi->tki", directions.conj(), ch)) ** 2
        system = -tg[:, :, None] * gains
        system[:, indices, indices] = gains[:, indices, indices]
        try:
            lam_next = np.linalg.solve(system, (tg * noise_power)[..., None])[..., 0]
        except np.linalg.LinAlgError:
            # a singular slice poisons the stacked solve; fall back per problem
            lam_next = np.full_like(la, np.nan)
            for j in range(system.shape[0]):
                try:
                    lam_next[j] = np.linalg.solve(system[j], tg[j] * noise_power)
                except np.linalg.LinAlgError:
                    pass
        invalid = ~np.all(np.isfinite(lam_next), axis=1) | np.any(lam_next <= 0, axis=1)
        if np.any(invalid):
            # plain substitution step for slices whose fixed receivers cannot
            # meet the targets yet; always positive, same fixed point
            quad = np.einsum("tmk,tmk->tk", ch.conj(), filtered).real
            plain = noise_power / ((1.0 + 1.0 / tg) * quad)
            lam_next = np.where(invalid[:, None], plain, lam_next)
        if damping != 1.0:
            lam_next = la + damping * (lam_next - la)
        change = np.max(np.abs(lam_next - la) / la, axis=1)
        lam[idx] = lam_next
        active[idx[change < tol]] = False
    bad = active.copy()  # never converged within budget

    good = ~bad
    directions = np.zeros_like(channels)
    if np.any(good):
        idx = np.flatnonzero(good)
        ch = channels[idx]
        la = lam[idx]
        regularized = identity + np.einsum(
            "tmk,tnk->tmn", ch * (la / noise_power)[:, None, :], ch.conj()
        )
        filtered = np.linalg.solve(regularized, ch)
        col_norms = np.sqrt(np.einsum("tmk,tmk->tk", filtered.conj(), filtered).real)
        directions[idx] = filtered / col_norms[:, None, :]
    return directions, lam, good
