"""Channel loss, gated threshold detectors and the gate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .photonics import db_to_transmittance


@dataclass(frozen=True)
class ChannelSpec:
    """Loss from the waveguide to the detector, excluding the analyzer's 50/50 split.

    ``loss_db_no_analyzer`` overrides ``loss_db`` for the scenarios run with
    the analyzers removed; when unset the same figure is used everywhere.
    """

    loss_db: float
    detuning_from_pump: float = 0.0  # Hz
    loss_db_no_analyzer: Optional[float] = None

    def __post_init__(self):
        if self.loss_db < 0 or (self.loss_db_no_analyzer is not None and self.loss_db_no_analyzer < 0):
            raise ValueError("channel loss must be >= 0 dB")

    def loss_for(self, with_analyzer: bool) -> float:
        if with_analyzer or self.loss_db_no_analyzer is None:
            return self.loss_db
        return self.loss_db_no_analyzer


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float
    dark_per_gate: float
    gate_width: float = 1.4e-9  # s
    gate_rate: float = 5e6  # Hz

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency!r}")
        if not 0.0 <= self.dark_per_gate < 1.0:
            raise ValueError(f"dark_per_gate must lie in [0, 1), got {self.dark_per_gate!r}")


@dataclass(frozen=True)
class GateSchedule:
    pulse_rate: float = 100e6  # Hz, double pulses
    gate_rate: float = 5e6  # Hz

    def __post_init__(self):
        if self.pulse_rate <= 0 or self.gate_rate <= 0:
            raise ValueError("rates must be positive")
        n = self.pulse_rate / self.gate_rate
        if abs(n - round(n)) > 1e-9 * n or round(n) < 1:
            raise ValueError(f"pulse_rate/gate_rate must be a positive integer, got {n}")

    @property
    def pulses_per_gate(self) -> int:
        """Every Nth double pulse falls inside a gate."""
        return int(round(self.pulse_rate / self.gate_rate))


def total_efficiency(channel: ChannelSpec, det: DetectorSpec, with_analyzer: bool = True) -> float:
    return db_to_transmittance(channel.loss_for(with_analyzer)) * det.efficiency


def click_probability(mean_photons: float, det: DetectorSpec) -> float:
    """Threshold click probability for Poisson light of mean ``mean_photons``.

    ``mean_photons`` is referred to the detector input, before quantum efficiency.
    """
    if not mean_photons >= 0:
        raise ValueError(f"mean photon number must be >= 0, got {mean_photons!r}")
    return 1.0 - (1.0 - det.dark_per_gate) * math.exp(-det.efficiency * mean_photons)


def click_probability_linear(mean_photons: float, det: DetectorSpec) -> float:
    """First-order form dark + efficiency * mean, valid while both are small."""
    if not mean_photons >= 0:
        raise ValueError(f"mean photon number must be >= 0, got {mean_photons!r}")
    return det.dark_per_gate + det.efficiency * mean_photons


def thin_photon(rng: np.random.Generator, survival: float) -> bool:
    if not 0.0 <= survival <= 1.0:
        raise ValueError(f"survival must lie in [0, 1], got {survival!r}")
    return bool(rng.random() < survival)
