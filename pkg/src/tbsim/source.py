"""Pair and noise-photon means per pulse, and Poisson sampling of pair counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class PumpConfig:
    wavelength: float  # m
    peak_power: float  # W
    pulse_width: float  # s
    pulse_interval: float  # s, spacing of the two time slots
    rep_rate: float  # Hz, double-pulse repetition
    pump_phase: float = 0.0  # rad, phase between the two pump pulses

    def __post_init__(self):
        if self.peak_power < 0:
            raise ValueError("peak_power must be >= 0")
        if not self.pulse_width < self.pulse_interval:
            raise ValueError("pulse_width must be shorter than pulse_interval")
        if self.rep_rate <= 0:
            raise ValueError("rep_rate must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def state_phase(self) -> float:
        """Relative phase of the emitted two-photon state, twice the pump phase."""
        return (2.0 * self.pump_phase) % (2.0 * math.pi)


@dataclass(frozen=True)
class SourceCalibration:
    gamma: float  # 1/(W m)
    l_eff: float  # m
    kappa: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.kappa <= 0 or self.l_eff <= 0:
            raise ValueError("gamma, l_eff and kappa must be positive")


class NoiseMode(str, Enum):
    SILICON = "silicon"
    BROADBAND_FIBER = "broadband_fiber"
    NONE = "none"


@dataclass(frozen=True)
class NoiseProfile:
    mode: NoiseMode = NoiseMode.SILICON
    raman_shift: float = 15.6e12  # Hz
    raman_width: float = 0.1e12  # Hz, half-width of the silicon Raman line
    mean_per_slot: float = 0.0  # photons/slot/channel at the source

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if self.mean_per_slot < 0:
            raise ValueError("noise mean must be >= 0")


def mean_pairs_per_pulse(cal: SourceCalibration, pump: PumpConfig) -> float:
    """Quadratic SFWM law: kappa * (gamma * P * L_eff)**2 pairs per pulse."""
    x = cal.gamma * pump.peak_power * cal.l_eff
    return cal.kappa * x * x


def calibrate_kappa(gamma: float, l_eff: float, anchor_power: float, anchor_mu: float) -> float:
    if anchor_power <= 0 or anchor_mu <= 0:
        raise ValueError("anchor power and anchor mean must be positive")
    x = gamma * anchor_power * l_eff
    return anchor_mu / (x * x)


def noise_mean(profile: NoiseProfile, channel_detuning: float) -> float:
    """Noise photons per slot at the source for a channel at ``channel_detuning`` Hz.

    Silicon Raman noise is a narrow line; channels outside it see nothing.
    """
    if profile.mode is NoiseMode.NONE:
        return 0.0
    if profile.mode is NoiseMode.BROADBAND_FIBER:
        return profile.mean_per_slot
    if abs(abs(channel_detuning) - profile.raman_shift) <= profile.raman_width:
        return profile.mean_per_slot
    return 0.0


# Inverse-CDF Poisson sampling. The table is built by one fixed recurrence so
# that every caller (scalar, numpy, numba) maps a uniform to the same integer.

_MAX_POISSON_MEAN = 700.0


def poisson_cdf_table(mu: float) -> np.ndarray:
    """Cumulative Poisson probabilities P(N <= k), k = 0..kmax."""
    if not (mu >= 0 and math.isfinite(mu)):
        raise ValueError(f"Poisson mean must be >= 0, got {mu!r}")
    if mu > _MAX_POISSON_MEAN:
        raise ValueError(f"Poisson mean {mu} too large for inverse-CDF sampling")
    kmax = int(mu + 12.0 * math.sqrt(mu) + 30)
    out = np.empty(kmax + 1)
    p = math.exp(-mu)
    cdf = p
    out[0] = cdf
    for k in range(1, kmax + 1):
        p *= mu / k
        cdf += p
        out[k] = cdf
    return out


def poisson_from_uniform(u, table: np.ndarray):
    """Smallest k with u <= cdf[k]; clipped to the table end."""
    k = np.searchsorted(table, u, side="left")
    return np.minimum(k, len(table) - 1)


def sample_pair_count(mu: float, rng: np.random.Generator) -> int:
    """One Poisson(mu) variate from one uniform of ``rng``."""
    table = poisson_cdf_table(mu)
    return int(poisson_from_uniform(rng.random(), table))
