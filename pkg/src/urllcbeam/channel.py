"""Network deployment, Rician channel draws, and the URLLC measurement history.

Users are dropped uniformly over a disk around the base station; user k
experiences a distance power law path gain psi_k = d_k**(-delta).  Channel
vectors follow a Rician model with an all-ones line-of-sight component:

    h = sqrt(psi) * ( sqrt(kappa/(kappa+1)) * 1 + sqrt(1/(kappa+1)) * g ),

with g circularly-symmetric complex Gaussian, identity covariance.  kappa = 0
is Rayleigh fading; kappa -> inf collapses onto the deterministic component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .config import ScenarioConfig
from .rng import RandomStream, complex_normal


@dataclass
class NetworkRealization:
    """One network drop: geometry plus (optionally) channel state.

    Index 0 is always the URLLC user; 1..K are the eMBB users.
    """

    distances_m: np.ndarray          # (K+1,)
    path_gains: np.ndarray           # (K+1,), psi_k = d_k**(-delta)
    num_antennas: int
    kappa_urllc: float
    kappa_embb: float
    embb_channels: np.ndarray | None = None   # (K, M) complex, instantaneous CSI
    history: np.ndarray | None = None         # (L, M) complex, past URLLC measurements

    @property
    def num_embb(self) -> int:
        return len(self.distances_m) - 1

    @property
    def psi_urllc(self) -> float:
        return float(self.path_gains[0])

    def validate(self) -> None:
        if self.distances_m.shape != self.path_gains.shape:
            raise ValueError("distances and path gains must have matching shape")
        if np.any(self.distances_m <= 0):
            raise ValueError("distances must be strictly positive")
        if self.embb_channels is not None and self.embb_channels.shape != (
            self.num_embb, self.num_antennas
        ):
            raise ValueError("embb_channels must have shape (K, M)")
        if self.history is not None and self.history.shape[1] != self.num_antennas:
            raise ValueError("history vectors must have length M")


def deploy_users(config: ScenarioConfig, stream: RandomStream) -> NetworkRealization:
    """Drop K+1 users uniformly over the disk of radius cell_radius_m.

    Radii use the area-uniform law d = R*sqrt(u); a minimum-distance floor
    avoids an unbounded path gain at the cell center.  Each user consumes a
    fixed number of draws, so enlarging K keeps earlier users in place.
    """
    gen = stream.child(rng.DEPLOY).generator()
    n = config.num_users
    distances = np.empty(n)
    for k in range(n):
        u = gen.uniform()
        gen.uniform()  # azimuth; geometry beyond distance does not enter the model
        distances[k] = max(config.min_distance_m, config.cell_radius_m * np.sqrt(u))
    gains = distances ** (-config.pathloss_exponent)
    return NetworkRealization(
        distances_m=distances,
        path_gains=gains,
        num_antennas=config.num_antennas,
        kappa_urllc=config.rician_k_urllc,
        kappa_embb=config.rician_k_embb,
    )


def sample_rician(
    psi: float,
    kappa: float,
    num_antennas: int,
    gen: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw Rician channel vectors; shape (M,) or (size, M)."""
    if psi <= 0:
        raise ValueError("path gain must be strictly positive")
    if kappa < 0:
        raise ValueError("Rician factor must be >= 0")
    shape = (num_antennas,) if size is None else (size, num_antennas)
    scatter = complex_normal(gen, shape)
    los_amp = np.sqrt(kappa / (kappa + 1.0))
    nlos_amp = np.sqrt(1.0 / (kappa + 1.0))
    return np.sqrt(psi) * (los_amp + nlos_amp * scatter)


def generate_embb_csi(realization: NetworkRealization, stream: RandomStream) -> np.ndarray:
    """Instantaneous CSI for the K eMBB users, one row per user."""
    gen = stream.child(rng.EMBB_CSI).generator()
    k = realization.num_embb
    m = realization.num_antennas
    scatter = complex_normal(gen, (k, m))
    los_amp = np.sqrt(realization.kappa_embb / (realization.kappa_embb + 1.0))
    nlos_amp = np.sqrt(1.0 / (realization.kappa_embb + 1.0))
    channels = los_amp + nlos_amp * scatter
    channels *= np.sqrt(realization.path_gains[1:, None])
    realization.embb_channels = channels
    return channels


def generate_history(
    realization: NetworkRealization, length: int, stream: RandomStream
) -> np.ndarray:
    """Independent past measurements of the URLLC channel, shape (L, M).

    Drawing interleaves per-measurement, so a shorter history is a prefix of
    a longer one from the same stream.
    """
    if length < 2:
        raise ValueError("insufficient history: need at least 2 measurements")
    gen = stream.child(rng.HISTORY).generator()
    history = sample_rician(
        realization.psi_urllc, realization.kappa_urllc,
        realization.num_antennas, gen, size=length,
    )
    realization.history = history
    return history


def build_realization(config: ScenarioConfig, stream: RandomStream) -> NetworkRealization:
    """Deploy users and attach eMBB CSI plus the URLLC history."""
    realization = deploy_users(config, stream)
    generate_embb_csi(realization, stream)
    generate_history(realization, config.history_len, stream)
    return realization
