"""Scenario configuration and unit conversions.

Powers are stored internally in linear milliwatts and SINRs as linear ratios.
The JSON config boundary accepts dBm / dB fields (matching how such systems
are usually specified) and converts on load.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any


def dbm_to_mw(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    return 10.0 * math.log10(value_mw)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class ScenarioConfig:
    """All scenario parameters plus solver knobs and seeds (linear units)."""

    num_antennas: int = 8
    num_embb: int = 4
    cell_radius_m: float = 500.0
    pathloss_exponent: float = 3.5
    max_power_mw: float = dbm_to_mw(47.0)
    noise_power_mw: float = dbm_to_mw(-104.0)  # thermal floor over 10 MHz
    rician_k_urllc: float = 0.0
    rician_k_embb: float = 0.0
    urllc_sinr_target: float = db_to_linear(-11.44)
    embb_sinr_targets: tuple[float, ...] = (10.0, 10.0, 10.0, 10.0)
    outage_target: float = 1e-3
    confidence: float = 0.99
    chernoff_r: float = 10.0
    num_candidates: int = 3000
    history_len: int = 500
    spectral_efficiency: float = 0.1  # bits/s/Hz; sets the target-draw floor
    rng_seed: int = 1
    max_redraws: int = 50
    mc_samples: int = 100_000
    min_distance_m: float = 1.0
    target_draw_db: bool = False  # draw the URLLC target log-uniform instead of uniform
    tpm_damping: float = 1.0

    def __post_init__(self) -> None:
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be a positive integer")
        if self.num_embb < 0:
            raise ValueError("num_embb must be non-negative")
        if self.num_embb + 1 > self.num_antennas:
            raise ValueError(
                f"need num_embb + 1 <= num_antennas, got {self.num_embb + 1} users "
                f"on {self.num_antennas} antennas"
            )
        if len(self.embb_sinr_targets) != self.num_embb:
            raise ValueError(
                f"embb_sinr_targets has length {len(self.embb_sinr_targets)}, "
                f"expected num_embb={self.num_embb}"
            )
        for name in ("cell_radius_m", "max_power_mw", "noise_power_mw",
                     "urllc_sinr_target", "chernoff_r", "min_distance_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if any(g <= 0 for g in self.embb_sinr_targets):
            raise ValueError("embb_sinr_targets must be strictly positive")
        if self.rician_k_urllc < 0 or self.rician_k_embb < 0:
            raise ValueError("Rician factors must be >= 0")
        if not 0.0 < self.outage_target < 1.0:
            raise ValueError("outage_target must lie in (0, 1)")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be positive")
        if self.history_len < 2:
            raise ValueError("history_len must be at least 2")
        if self.spectral_efficiency <= 0:
            raise ValueError("spectral_efficiency must be strictly positive")
        if self.max_redraws < 1:
            raise ValueError("max_redraws must be positive")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if not 0.0 < self.tpm_damping <= 1.0:
            raise ValueError("tpm_damping must lie in (0, 1]")

    @property
    def num_users(self) -> int:
        return self.num_embb + 1

    @property
    def urllc_target_floor(self) -> float:
        """Smallest useful URLLC SINR: the ratio that supports the configured
        spectral efficiency (2**r0 - 1)."""
        return 2.0 ** self.spectral_efficiency - 1.0

    def with_overrides(self, **kwargs: Any) -> "ScenarioConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict[str, Any]:
        """Resolved (linear-unit) representation; canonical for hashing."""
        d = {
            "num_antennas": self.num_antennas,
            "num_embb": self.num_embb,
            "cell_radius_m": self.cell_radius_m,
            "pathloss_exponent": self.pathloss_exponent,
            "max_power_mw": self.max_power_mw,
            "noise_power_mw": self.noise_power_mw,
            "rician_k_urllc": self.rician_k_urllc,
            "rician_k_embb": self.rician_k_embb,
            "urllc_sinr_target": self.urllc_sinr_target,
            "embb_sinr_targets": list(self.embb_sinr_targets),
            "outage_target": self.outage_target,
            "confidence": self.confidence,
            "chernoff_r": self.chernoff_r,
            "num_candidates": self.num_candidates,
            "history_len": self.history_len,
            "spectral_efficiency": self.spectral_efficiency,
            "rng_seed": self.rng_seed,
            "max_redraws": self.max_redraws,
            "mc_samples": self.mc_samples,
            "min_distance_m": self.min_distance_m,
            "target_draw_db": self.target_draw_db,
            "tpm_damping": self.tpm_damping,
        }
        return d

    def content_hash(self) -> str:
        """Stable hash of the resolved configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


# JSON fields accepted at the boundary, with converters into linear units.
_BOUNDARY_FIELDS = {
    "max_power_dbm": ("max_power_mw", dbm_to_mw),
    "noise_power_dbm": ("noise_power_mw", dbm_to_mw),
    "urllc_sinr_target_db": ("urllc_sinr_target", db_to_linear),
}
_PASSTHROUGH_FIELDS = {
    "num_antennas", "num_embb", "cell_radius_m", "pathloss_exponent",
    "max_power_mw", "noise_power_mw", "rician_k_urllc", "rician_k_embb",
    "urllc_sinr_target", "outage_target", "confidence", "chernoff_r",
    "num_candidates", "history_len", "spectral_efficiency", "rng_seed",
    "max_redraws", "mc_samples", "min_distance_m", "target_draw_db",
    "tpm_damping",
}


class ConfigError(ValueError):
    """Invalid configuration file or field values."""


def config_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _BOUNDARY_FIELDS:
            target, conv = _BOUNDARY_FIELDS[key]
            kwargs[target] = conv(float(value))
        elif key == "embb_sinr_target_db":
            continue  # handled below, needs num_embb
        elif key == "embb_sinr_targets":
            kwargs[key] = tuple(float(v) for v in value)
        elif key in _PASSTHROUGH_FIELDS:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config field: {key!r}")
    if "embb_sinr_target_db" in data:
        value = data["embb_sinr_target_db"]
        num_embb = int(kwargs.get("num_embb", ScenarioConfig.num_embb))
        if isinstance(value, (int, float)):
            kwargs["embb_sinr_targets"] = tuple(db_to_linear(float(value)) for _ in range(num_embb))
        else:
            kwargs["embb_sinr_targets"] = tuple(db_to_linear(float(v)) for v in value)
    elif "num_embb" in kwargs and "embb_sinr_targets" not in kwargs:
        # broadcast the default 10 dB target to the requested user count
        kwargs["embb_sinr_targets"] = tuple(10.0 for _ in range(int(kwargs["num_embb"])))
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ScenarioConfig:
    """Load a JSON config file; parse errors are reported with line/column."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config root must be a JSON object")
    return config_from_dict(data)
