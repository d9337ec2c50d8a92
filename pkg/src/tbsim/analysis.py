"""Estimators over count records and scans."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .config import ExperimentConfig
from .detection import ChannelSpec, DetectorSpec, total_efficiency
from .engines.analytic import analytic_rates
from .records import CountRecord


class UndefinedEstimate(ValueError):
    pass


class FitError(RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ------------------------------------------------------------------- CAR

@dataclass(frozen=True)
class CarEstimate:
    car: float
    sigma: float


def car_from_counts(
    coincidences: int,
    accidentals: int,
    gates: int = 1,
    accidental_trials: Optional[int] = None,
    accidental_var: Optional[float] = None,
) -> CarEstimate:
    """CAR with Poisson error bars.

    By default the accidentals come from one shifted gate per gate, so their
    variance is the count itself; pass ``accidental_var`` for other estimators.
    """
    trials = gates if accidental_trials is None else accidental_trials
    if accidentals <= 0:
        raise UndefinedEstimate("no accidental coincidences recorded; run more gates")
    var_a = accidentals if accidental_var is None else accidental_var
    rate_c = coincidences / gates
    rate_a = accidentals / trials
    car = rate_c / rate_a
    sig_c = math.sqrt(max(coincidences, 1)) / gates
    sig_a = math.sqrt(var_a) / trials
    if coincidences == 0:
        return CarEstimate(0.0, sig_c / rate_a)
    return CarEstimate(car, car * math.hypot(sig_c / rate_c, sig_a / rate_a))


def compute_car(record: CountRecord) -> CarEstimate:
    """Same-slot coincidences over same-slot shifted-gate accidentals."""
    c = int(np.trace(record.coincidences))
    a = int(np.trace(record.accidentals))
    var_a = None
    if record.accidental_trials != record.gates:
        # all-shift estimator: A ~ sum_k S_k I_k, delta method on the singles
        s = record.singles_s.astype(float)
        i = record.singles_i.astype(float)
        var_a = float(np.sum(i * i * s + s * s * i))
    return car_from_counts(c, a, record.gates, record.accidental_trials, var_a)


# --------------------------------------------------------------- fringes

@dataclass(frozen=True)
class FringeFit:
    """count = offset * (1 + visibility * cos(2 pi x / period + phase))."""

    visibility: float
    sigma_visibility: float
    offset: float
    sigma_offset: float
    amplitude: float  # offset * visibility
    sigma_amplitude: float
    phase: float
    sigma_phase: float
    period: float
    sigma_period: float
    chi2: float
    dof: int

    @property
    def exceeds_unity(self) -> bool:
        """Only possible for accidental-subtracted, finite-sample data."""
        return self.visibility > 1.0

    def model(self, x):
        x = np.asarray(x, dtype=float)
        return self.offset * (1 + self.visibility * np.cos(2 * math.pi * x / self.period + self.phase))


def _periodogram_peak(x, y, w, span):
    """Frequency (cycles per unit x) whose weighted sinusoid fit leaves the least residual."""
    dx = np.diff(np.sort(x))
    dx = dx[dx > 0]
    f_lo = 1.0 / span
    f_hi = max(0.45 / np.median(dx), f_lo)
    freqs = np.linspace(f_lo, f_hi, 64 * len(x))
    sw = np.sqrt(w)
    best_rss, best_f = math.inf, f_lo
    for f in freqs:
        arg = 2 * math.pi * f * x
        design = np.column_stack([np.ones_like(x), np.cos(arg), np.sin(arg)]) * sw[:, None]
        coef, *_ = np.linalg.lstsq(design, y * sw, rcond=None)
        rss = float(np.sum((design @ coef - y * sw) ** 2))
        if rss < best_rss * (1 - 1e-9):
            best_rss, best_f = rss, f
    return best_f, _phase_at(x, y, w, 2 * math.pi * best_f)


def _phase_at(x, y, w, b):
    arg = b * x
    sw = np.sqrt(w)
    design = np.column_stack([np.ones_like(x), np.cos(arg), np.sin(arg)]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(design, y * sw, rcond=None)
    return math.atan2(-coef[2], coef[1])


def fit_fringe(
    x: Sequence[float],
    counts: Sequence[float],
    period: Optional[float] = None,
    *,
    allow_negative: bool = False,
    max_nfev: int = 5000,
) -> FringeFit:
    """Poisson-weighted least-squares fit of a sinusoidal fringe.

    Weights are 1/max(count, 1). ``period`` fixes the fringe period in units
    of ``x``; otherwise it is started from the periodogram peak and fitted.
    Uncertainties come from the local covariance scaled by chi2/dof.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(counts, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and counts must be 1-d and of equal length")
    if len(x) < 5:
        raise ValueError("need at least 5 points")
    if not allow_negative and np.any(y < 0):
        raise ValueError("counts must be non-negative")
    span = float(x.max() - x.min())
    if span <= 0:
        raise FitError("degenerate span: all control values are equal")
    if period is not None and span < period * (1 - 1e-9):
        raise FitError("degenerate span: data cover less than one period", {"span": span, "period": period})

    w = 1.0 / np.maximum(y, 1.0)
    scale = float(np.max(np.abs(y))) or 1.0
    ys = y / scale
    sw = np.sqrt(w)

    a0 = float(ys.mean())
    ymax, ymin = ys.max(), ys.min()
    v0 = float((ymax - ymin) / (ymax + ymin)) if ymax + ymin != 0 else 0.0
    if period is None:
        f0, c0 = _periodogram_peak(x, ys, w, span)
        b0 = 2 * math.pi * f0
    else:
        b0 = 2 * math.pi / period
        c0 = _phase_at(x, ys, w, b0)

    if period is None:
        def resid(p):
            a, v, b, c = p
            return (ys - a * (1 + v * np.cos(b * x + c))) * sw

        p0 = [a0, v0, b0, c0]
    else:
        def resid(p):
            a, v, c = p
            return (ys - a * (1 + v * np.cos(b0 * x + c))) * sw

        p0 = [a0, v0, c0]

    res = least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=max_nfev, x_scale="jac")
    if not res.success or not np.all(np.isfinite(res.x)):
        raise FitError("fringe fit did not converge", {"status": res.status, "message": res.message,
                                                       "nfev": res.nfev, "x": res.x.tolist()})
    p = np.array(res.x, dtype=float)
    if period is None:
        a, v, b, c = p
    else:
        a, v, c = p
        b = b0
    J = res.jac
    if v < 0:
        v, c = -v, c + math.pi
        J = J.copy()
        J[:, 1] *= -1
    if b < 0:
        b, c = -b, -c
    c = math.remainder(c, 2 * math.pi)
    if period is None and b * span < 2 * math.pi * 0.99:
        raise FitError("degenerate span: fitted period exceeds the data span", {"span": span, "period": 2 * math.pi / b})

    dof = len(x) - len(p)
    chi2 = float(np.sum(res.fun**2)) * scale  # weighted chi2 in count units
    cov = np.linalg.pinv(J.T @ J) * (float(np.sum(res.fun**2)) / dof if dof > 0 else 0.0)
    var = np.clip(np.diag(cov), 0.0, None)
    s_a, s_v = math.sqrt(var[0]), math.sqrt(var[1])
    s_c = math.sqrt(var[-1])
    s_b = math.sqrt(var[2]) if period is None else 0.0
    # amplitude a*v: propagate with the (a, v) block
    var_amp = v * v * var[0] + a * a * var[1] + 2 * a * v * cov[0, 1]
    per = float(2 * math.pi / b)
    return FringeFit(
        visibility=float(v),
        sigma_visibility=s_v,
        offset=float(a * scale),
        sigma_offset=s_a * scale,
        amplitude=float(a * v * scale),
        sigma_amplitude=math.sqrt(max(var_amp, 0.0)) * scale,
        phase=float(c),
        sigma_phase=s_c,
        period=per,
        sigma_period=float(per * s_b / b),
        chi2=chi2,
        dof=dof,
    )


def subtract_accidentals(
    x: Sequence[float],
    counts: Sequence[float],
    accidental_level,
    period: Optional[float] = None,
) -> tuple[np.ndarray, FringeFit]:
    """Remove the accidental level point by point and refit.

    Negative corrected counts are kept, so a finite-sample corrected
    visibility can come out above 1.
    """
    acc = np.broadcast_to(np.asarray(accidental_level, dtype=float), np.shape(counts))
    if np.any(acc < 0):
        raise ValueError("accidental level must be >= 0")
    corrected = np.asarray(counts, dtype=float) - acc
    return corrected, fit_fringe(x, corrected, period, allow_negative=True)


# ------------------------------------------------------- accidental budget

def dark_fraction_of_accidentals(
    config: ExperimentConfig,
    mu: Optional[float] = None,
    phase_point: Optional[tuple[float, float]] = None,
    slot: int = 2,
) -> float:
    """Share of middle-slot accidentals that involve at least one dark count."""
    r = analytic_rates(config, phase_point=phase_point, mu=mu)
    p_s, p_i = r.p_s[slot - 1], r.p_i[slot - 1]
    if p_s <= 0 or p_i <= 0:
        raise UndefinedEstimate("singles probability is zero")
    d_s = config.signal_detector.dark_per_gate
    d_i = config.idler_detector.dark_per_gate
    return 1.0 - (p_s - d_s) * (p_i - d_i) / (p_s * p_i)


# ------------------------------------------------------------ gamma fit

@dataclass(frozen=True)
class GammaFit:
    gamma: float  # 1/(W m)
    residual: float  # rms relative error of the fitted means
    kappa: float = 1.0

    @property
    def gamma_per_w_km(self) -> float:
        return self.gamma * 1e3


def estimate_gamma_from_sweep(
    points: Sequence[tuple[float, float]],
    l_eff: float,
    kappa: float = 1.0,
) -> GammaFit:
    """Least-squares gamma for mu = kappa * (gamma * P * l_eff)**2.

    The model is linear in gamma**2, so the minimizer is closed form. Sums use
    math.fsum, which makes the result independent of point order.
    """
    pts = [(float(p), float(m)) for p, m in points]
    if not pts:
        raise ValueError("need at least one (power, mu) point")
    if any(p <= 0 for p, _ in pts):
        raise ValueError("powers must be positive")
    if all(m == 0 for _, m in pts):
        raise ValueError("all measured means are zero")
    if l_eff <= 0 or kappa <= 0:
        raise ValueError("l_eff and kappa must be positive")
    xs = [kappa * (p * l_eff) ** 2 for p, _ in pts]
    g2 = math.fsum(m * x for (_, m), x in zip(pts, xs)) / math.fsum(x * x for x in xs)
    if g2 <= 0:
        raise ValueError("fitted gamma**2 is not positive")
    rel = [(g2 * x - m) / m for (_, m), x in zip(pts, xs) if m != 0]
    return GammaFit(math.sqrt(g2), math.sqrt(math.fsum(r * r for r in rel) / len(rel)), kappa)


# ---------------------------------------------------------- mu from singles

@dataclass(frozen=True)
class MuEstimate:
    mu: float
    sigma: float
    clamped: bool = False


def infer_mu_from_singles(
    singles: int,
    gates: int,
    channel: ChannelSpec,
    detector: DetectorSpec,
    with_analyzer: bool = False,
) -> MuEstimate:
    """Photons per pulse at the source from a singles count, darks removed."""
    if gates <= 0:
        raise ValueError("gate count must be positive")
    alpha = total_efficiency(channel, detector, with_analyzer)
    rate = singles / gates
    sigma = math.sqrt(max(singles, 1)) / gates / alpha
    excess = rate - detector.dark_per_gate
    if excess <= 0:
        warnings.warn("singles rate at or below the dark level; mu clamped to 0", stacklevel=2)
        return MuEstimate(0.0, sigma, True)
    return MuEstimate(excess / alpha, sigma)


def infer_mu_from_record(record: CountRecord, config: ExperimentConfig, channel: str = "idler") -> MuEstimate:
    """Pool all slots of a no-analyzer record."""
    if config.with_analyzers:
        raise ValueError("mu inference needs a record taken without analyzers")
    singles = record.singles_s if channel == "signal" else record.singles_i
    ch = config.signal_channel if channel == "signal" else config.idler_channel
    det = config.signal_detector if channel == "signal" else config.idler_detector
    return infer_mu_from_singles(int(singles.sum()), record.gates * record.n_slots, ch, det)
