"""Closed-form engine, first order in the detected photon number.

Singles use the linear click model dark + alpha * mean; true coincidences are
mu * P(outcome) * alpha_s * alpha_i on top of the uncorrelated product
p_s * p_i. Valid while alpha * mu and the dark probabilities are small, which
holds by orders of magnitude for the gated InGaAs setting modelled here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..config import ConfigError, ExperimentConfig
from .model import DetectionModel, build_model


@dataclass(frozen=True)
class RateSet:
    """Per-gate probabilities, slots 0-based."""

    p_s: np.ndarray
    p_i: np.ndarray
    p_coinc: np.ndarray
    p_acc: np.ndarray
    pair_mean: float

    @property
    def car(self) -> float:
        """Same-slot coincidences over same-slot accidentals."""
        acc = np.trace(self.p_acc)
        return float(np.trace(self.p_coinc) / acc) if acc > 0 else math.inf


def rates_from_model(m: DetectionModel) -> RateSet:
    ps_pair, pi_pair = m.slot_probs()
    p_s = m.dark_s + m.alpha_s * (m.pair_mean * ps_pair + m.noise_s)
    p_i = m.dark_i + m.alpha_i * (m.pair_mean * pi_pair + m.noise_i)
    acc = np.outer(p_s, p_i)
    true = m.pair_mean * m.pair_coincidence_probs() * m.alpha_s * m.alpha_i
    return RateSet(p_s, p_i, true + acc, acc, m.pair_mean)


def analytic_rates(
    config: ExperimentConfig,
    phase_point: Optional[tuple[float, float]] = None,
    mu: Optional[float] = None,
) -> RateSet:
    return rates_from_model(build_model(config, mu=mu, phase_point=phase_point))


@dataclass(frozen=True)
class CarCurve:
    mu: np.ndarray
    car: np.ndarray
    mu_star: float
    car_star: float


def _effective_dark(m: DetectionModel) -> tuple[float, float]:
    # same-slot backgrounds are equal in every slot without analyzers
    return m.dark_s + m.alpha_s * m.noise_s[0], m.dark_i + m.alpha_i * m.noise_i[0]


def analytic_car_curve(config: ExperimentConfig, mu_grid: Sequence[float]) -> CarCurve:
    """CAR against pairs per pulse, with the closed-form optimum.

    Per slot CAR = 1 + a_s a_i mu / ((a_s mu + d_s)(a_i mu + d_i)), maximal at
    mu* = sqrt(d_s d_i / (a_s a_i)).
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if mu_grid.size == 0:
        raise ValueError("empty mu grid")
    if np.any(mu_grid <= 0):
        raise ValueError("mu values must be positive")
    config = config.for_scenario("car")
    car = np.array([analytic_rates(config, mu=float(u)).car for u in mu_grid])
    m = build_model(config, mu=1.0)
    d_s, d_i = _effective_dark(m)
    if d_s > 0 and d_i > 0:
        mu_star = math.sqrt(d_s * d_i / (m.alpha_s * m.alpha_i))
        car_star = analytic_rates(config, mu=mu_star).car
    else:
        # no background: CAR = 1 + 1/mu keeps rising as mu -> 0
        mu_star, car_star = 0.0, math.inf
    return CarCurve(mu_grid, car, mu_star, car_star)


@dataclass(frozen=True)
class FringeScan:
    temperatures: np.ndarray
    theta_s: float
    theta_i: np.ndarray
    coincidence: np.ndarray  # slot-2 coincidence probability per gate
    accidental: np.ndarray  # slot-2 accidental probability per gate

    @property
    def raw_visibility(self) -> float:
        c = self.coincidence
        return float((c.max() - c.min()) / (c.max() + c.min()))


def _require_analyzers(config: ExperimentConfig):
    if config.signal_analyzer is None or config.idler_analyzer is None:
        raise ConfigError("signal_analyzer", "fringe scan needs both analyzers configured")


def analytic_fringe_scan(
    config: ExperimentConfig,
    idler_temperatures: Sequence[float],
    mu: Optional[float] = None,
) -> FringeScan:
    _require_analyzers(config)
    temps = np.asarray(idler_temperatures, dtype=float)
    theta_s = config.signal_analyzer.theta
    thetas, coinc, acc = [], [], []
    for t in temps:
        theta_i = config.idler_analyzer.at_temperature(float(t)).theta
        r = analytic_rates(config, phase_point=(theta_s, theta_i), mu=mu)
        thetas.append(theta_i)
        coinc.append(r.p_coinc[1, 1])
        acc.append(r.p_acc[1, 1])
    return FringeScan(temps, theta_s, np.array(thetas), np.array(coinc), np.array(acc))
