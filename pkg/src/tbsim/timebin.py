"""Time-bin entangled state, delay-line analyzers and joint detection outcomes.

A photon outcome is (slot, port) with slot in 1..3 and port "A" or "B".
Arrays index outcomes as ``2 * (slot - 1) + port_index`` (A=0, B=1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

PORTS = ("A", "B")
N_SLOTS = 3
N_OUT = 2 * N_SLOTS


def outcome_index(slot: int, port: str) -> int:
    if slot not in (1, 2, 3) or port not in PORTS:
        raise ValueError(f"invalid outcome ({slot!r}, {port!r})")
    return 2 * (slot - 1) + PORTS.index(port)


@dataclass(frozen=True)
class TimeBinEntangledState:
    """(|1>_s|1>_i + exp(i phi)|2>_s|2>_i)/sqrt(2)."""

    phi: float = 0.0

    def amplitudes(self) -> tuple[complex, complex]:
        return (1 / math.sqrt(2), cmath.exp(1j * self.phi) / math.sqrt(2))


@dataclass(frozen=True)
class AnalyzerSpec:
    """One-bit delay interferometer with a thermally tuned path phase."""

    theta_at_ref: float = 0.0  # rad
    temp_to_phase: float = 2 * math.pi  # rad/degC
    temp_ref: float = 0.0  # degC
    temperature: float = 0.0  # degC
    excess_loss_db: float = 0.0

    @property
    def theta(self) -> float:
        return self.theta_at_ref + self.temp_to_phase * (self.temperature - self.temp_ref)

    def at_temperature(self, temperature: float) -> "AnalyzerSpec":
        return replace(self, temperature=temperature)


def mzi_port_amplitudes(slot_in: int, theta: float) -> dict[tuple[int, str], complex]:
    """Output amplitudes of one photon entering the analyzer in ``slot_in``.

    The short arm keeps the slot, the long arm delays it by one slot and adds
    ``theta``; port B carries the long arm with a sign flip.
    """
    if slot_in not in (1, 2):
        raise ValueError(f"input slot must be 1 or 2, got {slot_in!r}")
    late = cmath.exp(1j * theta) / 2
    return {
        (slot_in, "A"): 0.5,
        (slot_in + 1, "A"): late,
        (slot_in, "B"): 0.5,
        (slot_in + 1, "B"): -late,
    }


def _amplitude_rows(theta: float) -> np.ndarray:
    rows = np.zeros((2, N_OUT), dtype=complex)
    for k in (1, 2):
        for (slot, port), a in mzi_port_amplitudes(k, theta).items():
            rows[k - 1, outcome_index(slot, port)] = a
    return rows


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Probabilities over (signal outcome, idler outcome), shape (6, 6)."""

    table: np.ndarray

    def prob(self, s_slot: int, s_port: str, i_slot: int, i_port: str) -> float:
        return float(self.table[outcome_index(s_slot, s_port), outcome_index(i_slot, i_port)])

    def slot_pair(self, s_slot: int, i_slot: int) -> float:
        """Total probability of the slot pair, summed over ports."""
        s = slice(2 * (s_slot - 1), 2 * s_slot)
        i = slice(2 * (i_slot - 1), 2 * i_slot)
        return float(self.table[s, i].sum())

    def port_a(self) -> np.ndarray:
        """(3, 3) block of outcomes with both photons leaving port A."""
        return self.table[0::2, 0::2]

    def signal_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def idler_marginal(self) -> np.ndarray:
        return self.table.sum(axis=0)


def joint_outcome_distribution(
    state: TimeBinEntangledState, theta_s: float, theta_i: float
) -> JointOutcomeDistribution:
    c1, c2 = state.amplitudes()
    a_s = _amplitude_rows(theta_s)
    a_i = _amplitude_rows(theta_i)
    amp = c1 * np.outer(a_s[0], a_i[0]) + c2 * np.outer(a_s[1], a_i[1])
    p = amp.real**2 + amp.imag**2
    return JointOutcomeDistribution(np.clip(p, 0.0, None))


def slot2_coincidence_probability(phi: float, theta_s: float, theta_i: float) -> float:
    """Per-pair probability that both photons exit port A in the middle slot."""
    return (1.0 + math.cos(theta_s + theta_i - phi)) / 16.0
