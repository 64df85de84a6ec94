"""Minimum-power multi-antenna downlink precoding for a URLLC user known only
through past channel measurements, coexisting with eMBB users under
instantaneous CSI."""

from .config import ScenarioConfig, load_config
from .channel import NetworkRealization, build_realization, deploy_users, sample_rician
from .stats import ChannelStats, OutageCertificate, channel_stats, chernoff_certificate, student_t_quantile, synthesize_channel
from .precoders import DirectionMatrix, mrt_direction, tpm_directions, zf_directions
from .power import PowerAllocation, draw_urllc_target, gamma_max, sinr, solve_power
from .solver import CandidateSolution, PrecoderSolution, run_algorithm1
from .evaluation import EnsembleFit, OutageEstimate, confidence_value, ensemble_run, outage_mc, sweep
from .rng import RandomStream

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "load_config",
    "NetworkRealization",
    "build_realization",
    "deploy_users",
    "sample_rician",
    "ChannelStats",
    "OutageCertificate",
    "channel_stats",
    "chernoff_certificate",
    "student_t_quantile",
    "synthesize_channel",
    "DirectionMatrix",
    "mrt_direction",
    "tpm_directions",
    "zf_directions",
    "PowerAllocation",
    "draw_urllc_target",
    "gamma_max",
    "sinr",
    "solve_power",
    "CandidateSolution",
    "PrecoderSolution",
    "run_algorithm1",
    "EnsembleFit",
    "OutageEstimate",
    "confidence_value",
    "ensemble_run",
    "outage_mc",
    "sweep",
    "RandomStream",
]
