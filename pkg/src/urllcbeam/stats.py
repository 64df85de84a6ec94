"""History statistics, candidate-channel synthesis, and the outage certificate.

The certificate machinery upper-bounds the URLLC outage probability from the
L past channel measurements alone: an exponential-moment (Chernoff) bound

    P(gamma_0 < gamma_tar) <= E[ exp(r * (gamma_tar - gamma_0)) ],  r > 0,

is estimated by its sample mean mu_hat over the history, and the unknown
population mean is then bounded with confidence alpha through a Student-t
percentile on the sample mean's distribution:

    mu_ub = mu_hat - (s_hat / sqrt(L)) * T_inv(1 - alpha, L - 1).

With alpha > 0.5 the quantile is negative, so mu_ub sits above mu_hat.
A precoder is accepted when mu_ub <= outage target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv


@dataclass
class ChannelStats:
    """Sample mean and (PSD-repaired) sample covariance of the history."""

    mean: np.ndarray              # (M,)
    covariance: np.ndarray        # (M, M) Hermitian PSD
    sample_count: int
    factor: np.ndarray            # (M, M) A with A @ A^H == covariance


@dataclass
class OutageCertificate:
    mu_hat: float        # sample mean of the exponential bound terms
    s_hat: float         # sample standard deviation of the terms
    mu_ub: float         # confidence upper bound on the population mean
    r_used: float
    dof: int             # L - 1
    empirical_outage: float  # fraction of history samples below the target


def student_t_quantile(p: float, dof: float) -> float:
    """Inverse CDF of Student's t via the inverse regularized incomplete beta."""
    if not 0.0 < p < 1.0:
        raise ValueError("quantile order must lie in (0, 1)")
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if p == 0.5:
        return 0.0
    tail = 2.0 * min(p, 1.0 - p)
    x = betaincinv(dof / 2.0, 0.5, tail)
    value = float(np.sqrt(dof * (1.0 - x) / x))
    return -value if p < 0.5 else value


def channel_stats(history: np.ndarray) -> ChannelStats:
    """Sample mean/covariance of the measurement history (rows = samples).

    The raw sample covariance is Hermitian PSD up to rounding; it is
    symmetrized and eigenvalue-clamped so that a synthesis factor always
    exists even when L <= M leaves it rank deficient.
    """
    history = np.asarray(history)
    if history.ndim != 2 or history.shape[0] < 2:
        raise ValueError("insufficient history: need at least 2 measurements")
    count = history.shape[0]
    mean = history.mean(axis=0)
    centered = history - mean
    cov = centered.conj().T @ centered / (count - 1)
    cov = (cov + cov.conj().T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(cov)
    trace = float(np.trace(cov).real)
    floor = -1e-10 * max(trace, np.finfo(float).tiny) / cov.shape[0]
    if float(eigvals.min()) < floor:
        raise ValueError("sample covariance is not positive semidefinite")
    clamped = np.clip(eigvals, 0.0, None)
    cov = (eigvecs * clamped) @ eigvecs.conj().T
    cov = (cov + cov.conj().T) / 2.0
    factor = eigvecs * np.sqrt(clamped)
    if not np.all(np.isfinite(factor)):
        # pathological input: retry with a tiny diagonal jitter
        jitter = 1e-12 * max(trace, 1.0) / cov.shape[0]
        eigvals, eigvecs = np.linalg.eigh(cov + jitter * np.eye(cov.shape[0]))
        clamped = np.clip(eigvals, 0.0, None)
        factor = eigvecs * np.sqrt(clamped)
        if not np.all(np.isfinite(factor)):
            raise ValueError("degenerate covariance")
    return ChannelStats(mean=mean, covariance=cov, sample_count=count, factor=factor)


def synthesize_channel(stats: ChannelStats, gen: np.random.Generator) -> np.ndarray:
    """One candidate channel vector drawn from CN(mean, covariance)."""
    m = stats.mean.shape[0]
    z = gen.standard_normal((m, 2))
    noise = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    return stats.mean + stats.factor @ noise


def history_sinrs(history: np.ndarray, precoder: np.ndarray, noise_power: float) -> np.ndarray:
    """SINR of the desired (first) column against every history sample."""
    inner = history.conj() @ precoder                       # (L, K+1)
    powers = np.abs(inner) ** 2
    signal = powers[:, 0]
    interference = powers[:, 1:].sum(axis=1)
    return signal / (interference + noise_power)


def exponent_statistics(
    sinr_values: np.ndarray, sinr_target: float, r: float
) -> tuple[float, float, float]:
    """(mu_hat, s_hat, empirical outage) of the exponential bound terms.

    Guaranteed per sample: 1{sinr < target} <= exp(r*(target - sinr)), hence
    the empirical outage never exceeds mu_hat.  Checked here on every call.
    """
    if r <= 0:
        raise ValueError("the exponential-bound variable r must be > 0")
    sinr_values = np.asarray(sinr_values, dtype=float)
    terms = np.exp(r * (sinr_target - sinr_values))
    mu_hat = float(terms.mean())
    s_hat = float(terms.std(ddof=1)) if terms.size > 1 else 0.0
    empirical = float((sinr_values < sinr_target).mean())
    if empirical > mu_hat + 1e-12:
        raise RuntimeError(
            f"bound violation: empirical outage {empirical} exceeds mu_hat {mu_hat}"
        )
    return mu_hat, s_hat, empirical


def chernoff_certificate(
    history: np.ndarray,
    precoder: np.ndarray,
    sinr_target: float,
    r: float,
    noise_power: float,
    confidence: float,
) -> OutageCertificate:
    """Outage certificate for one precoding matrix against the history.

    Column 0 of ``precoder`` carries the desired signal; the remaining
    columns are interference.
    """
    history = np.asarray(history)
    if history.ndim != 2 or history.shape[0] < 2:
        raise ValueError("insufficient history: need at least 2 measurements")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    count = history.shape[0]
    sinrs = history_sinrs(history, precoder, noise_power)
    mu_hat, s_hat, empirical = exponent_statistics(sinrs, sinr_target, r)
    mu_ub = upper_bound_mean(mu_hat, s_hat, count, confidence)
    return OutageCertificate(
        mu_hat=mu_hat, s_hat=s_hat, mu_ub=mu_ub, r_used=r,
        dof=count - 1, empirical_outage=empirical,
    )


def upper_bound_mean(mu_hat: float, s_hat: float, count: int, confidence: float) -> float:
    """Confidence upper bound on the population mean from (mu_hat, s_hat).

    Degenerate spread (s_hat == 0) collapses the bound onto mu_hat.
    """
    if s_hat == 0.0:
        return mu_hat
    quantile = student_t_quantile(1.0 - confidence, count - 1)
    return mu_hat - s_hat / np.sqrt(count) * quantile


def certificate_batch(
    history: np.ndarray,
    precoders: np.ndarray,
    sinr_target: float,
    r: float,
    noise_power: float,
    confidence: float,
    chunk: int = 256,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized certificates for a stack of precoders (T, M, K+1).

    Returns (mu_hat, s_hat, mu_ub, empirical_outage), each of shape (T,).
    Identical formulas to :func:`chernoff_certificate`, evaluated blockwise.
    """
    count = history.shape[0]
    total = precoders.shape[0]
    mu_hat = np.empty(total)
    s_hat = np.empty(total)
    empirical = np.empty(total)
    hist_c = history.conj()
    for start in range(0, total, chunk):
        block = precoders[start:start + chunk]
        inner = np.einsum("lm,tmk->tlk", hist_c, block)
        powers = np.abs(inner) ** 2
        sinrs = powers[:, :, 0] / (powers[:, :, 1:].sum(axis=2) + noise_power)
        terms = np.exp(r * (sinr_target - sinrs))
        mu_hat[start:start + chunk] = terms.mean(axis=1)
        s_hat[start:start + chunk] = terms.std(axis=1, ddof=1)
        empirical[start:start + chunk] = (sinrs < sinr_target).mean(axis=1)
    if np.any(empirical > mu_hat + 1e-12):
        raise RuntimeError("bound violation: empirical outage exceeds mu_hat")
    quantile = student_t_quantile(1.0 - confidence, count - 1)
    mu_ub = np.where(
        s_hat == 0.0, mu_hat, mu_hat - s_hat / np.sqrt(count) * quantile
    )
    return mu_hat, s_hat, mu_ub, empirical
