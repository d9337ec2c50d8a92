import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tbsim.timebin import (
    AnalyzerSpec,
    TimeBinEntangledState,
    joint_outcome_distribution,
    mzi_port_amplitudes,
    slot2_coincidence_probability,
)

angles = st.floats(-10, 10, allow_nan=False)


def brute_force(phi, theta_s, theta_i):
    """Enumerate emission bin x signal path x idler path x ports."""
    out = {}
    paths = {"short": (0, lambda th: 1.0), "long": (1, lambda th: cmath.exp(1j * th))}
    for k, c in ((1, 1 / math.sqrt(2)), (2, cmath.exp(1j * phi) / math.sqrt(2))):
        for ps, (ds, fs) in paths.items():
            for pi, (di, fi) in paths.items():
                for port_s in "AB":
                    for port_i in "AB":
                        a = c * 0.5 * fs(theta_s) * 0.5 * fi(theta_i)
                        if port_s == "B" and ps == "long":
                            a = -a
                        if port_i == "B" and pi == "long":
                            a = -a
                        key = ((k + ds, port_s), (k + di, port_i))
                        out[key] = out.get(key, 0) + a
    return {key: abs(a) ** 2 for key, a in out.items()}


def test_mzi_zero_phase():
    amp = mzi_port_amplitudes(1, 0.0)
    assert amp[(1, "A")] == 0.5 and amp[(2, "A")] == pytest.approx(0.5)
    assert amp[(1, "B")] == 0.5 and amp[(2, "B")] == pytest.approx(-0.5)


def test_mzi_quarter_wave():
    assert mzi_port_amplitudes(2, math.pi / 2)[(3, "A")] == pytest.approx(0.5j, abs=1e-16)


@given(angles, st.sampled_from([1, 2]))
def test_mzi_unitary(theta, slot):
    assert sum(abs(a) ** 2 for a in mzi_port_amplitudes(slot, theta).values()) == pytest.approx(1.0, abs=1e-15)


def test_mzi_bad_slot():
    with pytest.raises(ValueError):
        mzi_port_amplitudes(3, 0.0)


def test_constructive_and_destructive():
    d = joint_outcome_distribution(TimeBinEntangledState(0.0), 0.0, 0.0)
    assert d.prob(2, "A", 2, "A") == pytest.approx(1 / 8, abs=1e-15)
    assert d.prob(2, "A", 2, "B") == pytest.approx(0.0, abs=1e-15)
    d = joint_outcome_distribution(TimeBinEntangledState(math.pi), 0.0, 0.0)
    assert d.prob(2, "A", 2, "A") == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=200)
@given(angles, angles, angles)
def test_matches_brute_force(phi, ts, ti):
    d = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti)
    oracle = brute_force(phi, ts, ti)
    for (s, i), p in oracle.items():
        assert d.prob(*s, *i) == pytest.approx(p, abs=1e-14)
    assert d.table.sum() == pytest.approx(sum(oracle.values()), abs=1e-14)


def test_closed_form_entries():
    phi, ts, ti = 0.4, 1.1, -0.3
    delta = ts + ti - phi
    d = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti)
    assert d.prob(2, "A", 2, "A") == pytest.approx((1 + math.cos(delta)) / 16, abs=1e-15)
    assert d.prob(2, "B", 2, "B") == pytest.approx((1 + math.cos(delta)) / 16, abs=1e-15)
    assert d.prob(2, "A", 2, "B") == pytest.approx((1 - math.cos(delta)) / 16, abs=1e-15)
    assert d.prob(2, "B", 2, "A") == pytest.approx((1 - math.cos(delta)) / 16, abs=1e-15)
    for s, i in [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3)]:
        assert d.slot_pair(s, i) == pytest.approx(1 / 8, abs=1e-15)
        for ps in "AB":
            for pi in "AB":
                assert d.prob(s, ps, i, pi) == pytest.approx(1 / 32, abs=1e-15)
    assert d.slot_pair(1, 3) == 0.0 and d.slot_pair(3, 1) == 0.0


def test_property_suite_random_triples():
    rng = np.random.default_rng(7)
    ref_sig = None
    for phi, ts, ti in rng.uniform(-2 * math.pi, 2 * math.pi, size=(1000, 3)):
        d = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti)
        assert abs(d.table.sum() - 1) <= 1e-12
        assert d.table.min() >= 0.0
        # no-signaling: each marginal is independent of the far analyzer
        d2 = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti + 1.234)
        np.testing.assert_allclose(d.signal_marginal(), d2.signal_marginal(), atol=1e-12)
        d3 = joint_outcome_distribution(TimeBinEntangledState(phi), ts - 0.77, ti)
        np.testing.assert_allclose(d.idler_marginal(), d3.idler_marginal(), atol=1e-12)
        port_a = d.signal_marginal()[0::2].sum()
        assert port_a == pytest.approx(0.5, abs=1e-12)
        assert d.prob(2, "A", 2, "A") == pytest.approx(slot2_coincidence_probability(phi, ts, ti), abs=1e-12)


@given(angles, angles, angles, angles)
def test_depends_on_phase_sum_only(phi, ts, ti, x):
    a = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti).table
    b = joint_outcome_distribution(TimeBinEntangledState(phi), ts + x, ti - x).table
    np.testing.assert_allclose(a, b, atol=1e-12)


@given(angles, angles, angles)
def test_periodic(phi, ts, ti):
    a = joint_outcome_distribution(TimeBinEntangledState(phi), ts, ti).table
    b = joint_outcome_distribution(TimeBinEntangledState(phi), ts + 2 * math.pi, ti).table
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_slot2_closed_form_values():
    assert slot2_coincidence_probability(0.3, 0.1, 0.2) == pytest.approx(1 / 8)
    assert slot2_coincidence_probability(0.0, math.pi, 0.0) == pytest.approx(0.0, abs=1e-17)
    assert slot2_coincidence_probability(0.0, math.pi / 2, 0.0) == pytest.approx(1 / 16)


def test_analyzer_temperature_map():
    a = AnalyzerSpec(theta_at_ref=0.5, temp_to_phase=2.0, temp_ref=12.3, temperature=12.3)
    assert a.theta == 0.5
    assert a.at_temperature(12.8).theta == pytest.approx(1.5)
