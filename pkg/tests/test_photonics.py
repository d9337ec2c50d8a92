import math

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from tbsim.photonics import (
    WaveguideSpec,
    coherence_time,
    db_to_transmittance,
    effective_length,
    gamma_coefficient,
)

SI_WG = WaveguideSpec(n2=9e-18, a_eff=0.042e-12, length=1.09e-2, prop_loss_db=3.1, coupling_loss_db_per_facet=4.5)


def test_db_examples():
    assert db_to_transmittance(0) == 1.0
    assert db_to_transmittance(10) == pytest.approx(0.1, rel=1e-15)
    assert db_to_transmittance(13.5) == pytest.approx(0.04467, abs=5e-6)


@pytest.mark.parametrize("bad", [-0.1, math.inf, math.nan])
def test_db_rejects(bad):
    with pytest.raises(ValueError):
        db_to_transmittance(bad)


@given(st.floats(0, 100), st.floats(0, 100))
def test_db_multiplicative(a, b):
    assert db_to_transmittance(a + b) == pytest.approx(db_to_transmittance(a) * db_to_transmittance(b), rel=1e-12)


@given(st.floats(0, 100), st.floats(1e-6, 10))
def test_db_strictly_decreasing(a, d):
    assert db_to_transmittance(a + d) < db_to_transmittance(a)


def test_gamma_silicon():
    g = gamma_coefficient(SI_WG, 1550e-9)
    assert g.per_w_km == pytest.approx(8.7e5, rel=0.01)
    assert g.per_w_km == pytest.approx(1e3 * g.per_w_m)


def test_gamma_fiber_scale():
    dsf = WaveguideSpec(n2=2.6e-20, a_eff=50e-12, length=500.0)
    # direct evaluation: 2.6e-20 * 2 pi / (1550e-9 * 50e-12) * 1e3
    assert gamma_coefficient(dsf, 1550e-9).per_w_km == pytest.approx(2.107907, rel=1e-6)


def test_gamma_scaling():
    g1 = gamma_coefficient(SI_WG, 1550e-9).per_w_m
    g2 = gamma_coefficient(WaveguideSpec(9e-18, 0.084e-12, 1.09e-2), 1550e-9).per_w_m
    assert g2 == pytest.approx(g1 / 2, rel=1e-12)


@given(st.floats(1e-20, 1e-16), st.floats(1e-14, 1e-9), st.floats(0.1, 10))
def test_gamma_linear_in_n2_inverse_in_area(n2, a, k):
    g = gamma_coefficient(WaveguideSpec(n2, a, 1.0), 1.55e-6).per_w_m
    assert gamma_coefficient(WaveguideSpec(k * n2, a, 1.0), 1.55e-6).per_w_m == pytest.approx(k * g, rel=1e-12)
    assert gamma_coefficient(WaveguideSpec(n2, k * a, 1.0), 1.55e-6).per_w_m == pytest.approx(g / k, rel=1e-12)


@pytest.mark.parametrize("wl", [0.0, -1e-6])
def test_gamma_bad_wavelength(wl):
    with pytest.raises(ValueError):
        gamma_coefficient(SI_WG, wl)


def test_effective_length_lossless():
    wg = WaveguideSpec(9e-18, 0.042e-12, 1.09e-2, 0.0)
    assert effective_length(wg) == wg.length


def test_effective_length_matches_quadrature():
    alpha = 3.1 * math.log(10) / (10 * 0.0109)
    oracle, _ = quad(lambda z: math.exp(-alpha * z), 0, 0.0109, epsabs=1e-16)
    assert effective_length(SI_WG) == pytest.approx(oracle, rel=1e-10)
    # about 0.78 cm
    assert effective_length(SI_WG) == pytest.approx(7.791e-3, rel=1e-3)


def test_effective_length_long_limit():
    wg = WaveguideSpec(1e-18, 1e-12, 1.0, prop_loss_db=2000.0)
    alpha = 2000 * math.log(10) / 10
    assert effective_length(wg) == pytest.approx(1 / alpha, rel=1e-12)


@given(st.floats(1e-4, 10), st.one_of(st.just(0.0), st.floats(1e-6, 50)))
def test_effective_length_bounded(length, loss):
    wg = WaveguideSpec(1e-18, 1e-12, length, loss)
    le = effective_length(wg)
    assert le <= length
    if loss > 0:
        assert le < length


def test_waveguide_invariants():
    with pytest.raises(ValueError):
        WaveguideSpec(0.0, 1e-12, 1.0)
    with pytest.raises(ValueError):
        WaveguideSpec(1e-18, 1e-12, 1.0, prop_loss_db=-1)


def test_coherence_time_conventions():
    assert coherence_time(25e9, "lorentzian") == pytest.approx(1 / (math.pi * 25e9), rel=1e-12)
    assert coherence_time(25e9, "gaussian") == pytest.approx(17.64e-12, rel=1e-12)
    for conv in ("gaussian", "lorentzian", "rectangular"):
        assert coherence_time(50e9, conv) == pytest.approx(coherence_time(25e9, conv) / 2, rel=1e-12)
    with pytest.raises(ValueError):
        coherence_time(0.0)
