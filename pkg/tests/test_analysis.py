import math
import warnings

import numpy as np
import pytest

from tbsim.analysis import (
    FitError,
    UndefinedEstimate,
    car_from_counts,
    compute_car,
    dark_fraction_of_accidentals,
    estimate_gamma_from_sweep,
    fit_fringe,
    infer_mu_from_record,
    infer_mu_from_singles,
    subtract_accidentals,
)
from tbsim.detection import ChannelSpec, DetectorSpec, total_efficiency
from tbsim.engines import mc_run
from tbsim.records import CountRecord


def linear_fringe_oracle(x, y, period):
    """Fixed-period fringe fit as weighted linear least squares on (1, cos, sin)."""
    w = np.sqrt(1.0 / np.maximum(y, 1.0))
    arg = 2 * np.pi * x / period
    A = np.column_stack([np.ones_like(x), np.cos(arg), np.sin(arg)]) * w[:, None]
    p, *_ = np.linalg.lstsq(A, y * w, rcond=None)
    return math.hypot(p[1], p[2]) / p[0], p[0]


def test_car_from_counts_values():
    est = car_from_counts(50, 10, gates=1000)
    assert est.car == pytest.approx(5.0)
    assert est.sigma == pytest.approx(5.0 * math.sqrt(1 / 50 + 1 / 10))


def test_car_zero_accidentals_raises_and_zero_coincidences_is_finite():
    with pytest.raises(UndefinedEstimate):
        car_from_counts(10, 0, gates=100)
    est = car_from_counts(0, 4, gates=100)
    assert est.car == 0.0 and math.isfinite(est.sigma) and est.sigma > 0


def test_compute_car_all_shift_estimator():
    rec = CountRecord(
        gates=4, singles_s=np.array([2, 2]), singles_i=np.array([2, 2]),
        coincidences=np.array([[1, 0], [0, 1]]), accidentals=np.array([[3, 4], [4, 3]]),
        accidental_trials=12,
    )
    est = compute_car(rec)
    assert est.car == pytest.approx((2 / 4) / (6 / 12))


def test_fit_fringe_recovers_noiseless_parameters():
    x = np.linspace(11.8, 13.8, 21)
    y = 40 * (1 + 0.7 * np.cos(2 * np.pi * x + 0.4))
    free = fit_fringe(x, y)
    fixed = fit_fringe(x, y, period=1.0)
    for f in (free, fixed):
        assert f.visibility == pytest.approx(0.7, abs=1e-9)
        assert f.offset == pytest.approx(40, rel=1e-9)
        assert f.period == pytest.approx(1.0, rel=1e-9)
        assert math.remainder(f.phase - 0.4, 2 * math.pi) == pytest.approx(0, abs=1e-8)


def test_fit_fringe_matches_linear_oracle_on_noisy_counts():
    rng = np.random.default_rng(5)
    x = np.linspace(0, 2, 17)
    y = rng.poisson(30 * (1 + 0.8 * np.cos(2 * np.pi * x - 1.0))).astype(float)
    fit = fit_fringe(x, y, period=1.0)
    v, a = linear_fringe_oracle(x, y, 1.0)
    assert fit.visibility == pytest.approx(v, rel=1e-9)
    assert fit.offset == pytest.approx(a, rel=1e-9)
    assert fit.sigma_visibility > 0


def test_fit_fringe_input_checks():
    with pytest.raises(ValueError):
        fit_fringe([0, 1, 2, 3], [1, 2, 3, 4])
    with pytest.raises(FitError):
        fit_fringe(np.zeros(6), np.ones(6))
    with pytest.raises(FitError):
        fit_fringe(np.linspace(0, 0.5, 6), np.arange(6.0), period=1.0)
    with pytest.raises(ValueError):
        fit_fringe(np.arange(6.0), -np.ones(6))


def test_subtraction_keeps_negative_points_and_restores_unity():
    x = np.linspace(0, 2, 21)
    true = 10 * (1 + np.cos(2 * np.pi * x))
    corrected, fit = subtract_accidentals(x, true + 3.0, 3.0, period=1.0)
    assert np.allclose(corrected, true)
    assert fit.visibility == pytest.approx(1.0, abs=1e-9)
    corrected, _ = subtract_accidentals(x, true, 3.0, period=1.0)
    assert corrected.min() < 0


def test_dark_fraction(fringe_cfg):
    f = dark_fraction_of_accidentals(fringe_cfg, mu=0.1)
    assert 0.27 <= f <= 0.37


def test_gamma_fit_exact_and_order_invariant():
    l_eff = 7.791e-3
    pts = [(p, 1.3 * (420.0 * p * l_eff) ** 2) for p in np.linspace(0.02, 0.2, 10)]
    fit = estimate_gamma_from_sweep(pts, l_eff, kappa=1.3)
    assert fit.gamma == pytest.approx(420.0, rel=1e-12)
    assert fit.residual < 1e-12
    rng = np.random.default_rng(0)
    for _ in range(5):
        shuffled = [pts[k] for k in rng.permutation(len(pts))]
        assert estimate_gamma_from_sweep(shuffled, l_eff, kappa=1.3).gamma == fit.gamma


def test_gamma_fit_single_point():
    fit = estimate_gamma_from_sweep([(0.12, 0.1)], 0.0076)
    assert fit.gamma == pytest.approx(math.sqrt(0.1) / (0.12 * 0.0076), rel=1e-12)
    assert fit.gamma == pytest.approx(346.74, rel=1e-4)


def test_gamma_fit_rejects_bad_input():
    for pts in ([], [(0.0, 0.1)], [(0.1, 0.0), (0.2, 0.0)]):
        with pytest.raises(ValueError):
            estimate_gamma_from_sweep(pts, 0.0076)


def test_infer_mu_inverts_linear_singles():
    ch, det = ChannelSpec(12.0), DetectorSpec(0.1, 2e-5)
    alpha = total_efficiency(ch, det, with_analyzer=False)
    gates = 10**8
    singles = round((2e-5 + alpha * 0.05) * gates)
    est = infer_mu_from_singles(singles, gates, ch, det)
    assert est.mu == pytest.approx(0.05, rel=1e-4)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        low = infer_mu_from_singles(10, gates, ch, det)
    assert low.clamped and low.mu == 0.0 and w


def test_infer_mu_from_mc_record(car_cfg):
    rec = mc_run(car_cfg, 4 * 10**6, 3, mu=0.05)
    est = infer_mu_from_record(rec, car_cfg)
    assert abs(est.mu - 0.05) <= 4 * est.sigma
