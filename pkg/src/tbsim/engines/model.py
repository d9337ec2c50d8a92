"""Reduction of an ExperimentConfig to the per-gate quantities both engines use."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config import ExperimentConfig
from ..detection import total_efficiency
from ..photonics import db_to_transmittance
from ..source import mean_pairs_per_pulse, noise_mean
from ..timebin import N_OUT, TimeBinEntangledState, joint_outcome_distribution


@dataclass(frozen=True)
class DetectionModel:
    """Everything needed to generate clicks for one operating point.

    Pair outcomes are listed in ``outcome_probs``; ``s_slot``/``i_slot`` give the
    0-based detector slot each outcome lands in, or -1 when the photon leaves
    through the unmonitored port.
    """

    n_slots: int
    pair_mean: float  # pairs per gated window
    outcome_probs: np.ndarray
    s_slot: np.ndarray
    i_slot: np.ndarray
    alpha_s: float
    alpha_i: float
    dark_s: float
    dark_i: float
    noise_s: np.ndarray  # source noise photons reaching each monitored slot
    noise_i: np.ndarray

    def slot_probs(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pair probability of a signal (idler) photon in each monitored slot."""
        ps = np.zeros(self.n_slots)
        pi = np.zeros(self.n_slots)
        for p, s, i in zip(self.outcome_probs, self.s_slot, self.i_slot):
            if s >= 0:
                ps[s] += p
            if i >= 0:
                pi[i] += p
        return ps, pi

    def pair_coincidence_probs(self) -> np.ndarray:
        """Per-pair probability of signal in slot j and idler in slot k, both monitored."""
        pc = np.zeros((self.n_slots, self.n_slots))
        for p, s, i in zip(self.outcome_probs, self.s_slot, self.i_slot):
            if s >= 0 and i >= 0:
                pc[s, i] += p
        return pc

    def background_click_probs(self) -> tuple[np.ndarray, np.ndarray]:
        """Exact per-slot probability of a click from darks or noise photons alone."""
        bs = 1.0 - (1.0 - self.dark_s) * np.exp(-self.alpha_s * self.noise_s)
        bi = 1.0 - (1.0 - self.dark_i) * np.exp(-self.alpha_i * self.noise_i)
        return bs, bi


def analyzer_phases(config: ExperimentConfig) -> tuple[float, float]:
    return config.signal_analyzer.theta, config.idler_analyzer.theta


def build_model(
    config: ExperimentConfig,
    mu: Optional[float] = None,
    phase_point: Optional[tuple[float, float]] = None,
) -> DetectionModel:
    """``mu`` is pairs per pulse without analyzers, pairs per qubit with them.

    When omitted it follows from the pump power; a qubit spans both pump
    pulses, so it then carries twice the per-pulse mean.
    """
    if mu is not None and not (mu >= 0 and math.isfinite(mu)):
        raise ValueError(f"pair mean must be >= 0, got {mu!r}")
    fringe = config.with_analyzers
    per_pulse = mean_pairs_per_pulse(config.calibration, config.pump)
    a_s = total_efficiency(config.signal_channel, config.signal_detector, fringe)
    a_i = total_efficiency(config.idler_channel, config.idler_detector, fringe)
    n_src_s = noise_mean(config.noise, config.signal_channel.detuning_from_pump)
    n_src_i = noise_mean(config.noise, config.idler_channel.detuning_from_pump)

    if fringe:
        a_s *= db_to_transmittance(config.signal_analyzer.excess_loss_db)
        a_i *= db_to_transmittance(config.idler_analyzer.excess_loss_db)
        theta_s, theta_i = phase_point if phase_point is not None else analyzer_phases(config)
        dist = joint_outcome_distribution(TimeBinEntangledState(config.pump.state_phase), theta_s, theta_i)
        probs = dist.table.ravel()
        idx = np.arange(N_OUT)
        # port A outcomes are even indices; slot = index // 2
        mon = np.where(idx % 2 == 0, idx // 2, -1)
        s_slot = np.repeat(mon, N_OUT)
        i_slot = np.tile(mon, N_OUT)
        pair_mean = 2.0 * per_pulse if mu is None else mu
        # source noise in slots 1 and 2 spreads over three slots at port A
        spread = np.array([0.25, 0.5, 0.25])
        noise_s, noise_i = n_src_s * spread, n_src_i * spread
        n_slots = 3
    else:
        probs = np.array([0.5, 0.5])
        s_slot = np.array([0, 1])
        i_slot = np.array([0, 1])
        pair_mean = 2.0 * (per_pulse if mu is None else mu)
        noise_s, noise_i = np.full(2, n_src_s), np.full(2, n_src_i)
        n_slots = 2

    return DetectionModel(
        n_slots=n_slots,
        pair_mean=pair_mean,
        outcome_probs=np.asarray(probs, dtype=float),
        s_slot=np.asarray(s_slot, dtype=np.int64),
        i_slot=np.asarray(i_slot, dtype=np.int64),
        alpha_s=a_s,
        alpha_i=a_i,
        dark_s=config.signal_detector.dark_per_gate,
        dark_i=config.idler_detector.dark_per_gate,
        noise_s=noise_s,
        noise_i=noise_i,
    )
