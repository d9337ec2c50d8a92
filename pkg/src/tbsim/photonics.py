"""Physical constants and closed-form waveguide quantities.

Everything is SI internally; dB and 1/(W km) only appear at the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 2.99792458e8  # m/s, exact


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class WaveguideSpec:
    """Nonlinear medium parameters.

    ``prop_loss_db`` is the propagation loss over the full ``length``.
    """

    n2: float  # m^2/W
    a_eff: float  # m^2
    length: float  # m
    prop_loss_db: float = 0.0
    coupling_loss_db_per_facet: float = 0.0

    def __post_init__(self):
        for name in ("n2", "a_eff", "length"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        for name in ("prop_loss_db", "coupling_loss_db_per_facet"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be >= 0, got {v!r}")


@dataclass(frozen=True)
class Gamma:
    per_w_m: float

    @property
    def per_w_km(self) -> float:
        return self.per_w_m * 1e3


class CoherenceConvention(str, Enum):
    GAUSSIAN = "gaussian"
    LORENTZIAN = "lorentzian"
    RECTANGULAR = "rectangular"


# time-bandwidth products, FWHM in Hz -> coherence time in s
_TBP = {
    CoherenceConvention.GAUSSIAN: 0.441,
    CoherenceConvention.LORENTZIAN: 1.0 / math.pi,
    CoherenceConvention.RECTANGULAR: 0.886,
}


def db_to_transmittance(loss_db: float) -> float:
    if not math.isfinite(loss_db) or loss_db < 0:
        raise ValueError(f"loss must be a finite non-negative dB value, got {loss_db!r}")
    return 10.0 ** (-loss_db / 10.0)


def db_to_neper_per_m(loss_db: float, length: float) -> float:
    """Power attenuation coefficient (1/m) for ``loss_db`` spread over ``length``."""
    return loss_db * math.log(10.0) / (10.0 * length)


def gamma_coefficient(spec: WaveguideSpec, wavelength: float) -> Gamma:
    """Kerr nonlinearity n2*omega/(c*A_eff) at ``wavelength`` (m)."""
    if not (math.isfinite(wavelength) and wavelength > 0):
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    omega = 2.0 * math.pi * CONSTANTS.c / wavelength
    return Gamma(spec.n2 * omega / (CONSTANTS.c * spec.a_eff))


def effective_length(spec: WaveguideSpec) -> float:
    alpha = db_to_neper_per_m(spec.prop_loss_db, spec.length)
    x = alpha * spec.length
    if x == 0.0:
        return spec.length
    # -expm1(-x) keeps precision when the loss is tiny
    return -math.expm1(-x) / alpha


def coherence_time(fwhm_hz: float, convention: CoherenceConvention | str = "lorentzian") -> float:
    """Coherence time for a filter of the given FWHM.

    Informational only; the engines never use it.
    """
    if not (math.isfinite(fwhm_hz) and fwhm_hz > 0):
        raise ValueError(f"bandwidth must be positive, got {fwhm_hz!r}")
    return _TBP[CoherenceConvention(convention)] / fwhm_hz
