import math

import pytest

from tbsim.config import ConfigError, Scenario, load_config, paper_config, parse_config, preset_text


def edited(old, new):
    text = preset_text("paper")
    assert old in text
    return text.replace(old, new, 1)


def test_preset_values(fringe_cfg):
    c = fringe_cfg
    assert c.pump.peak_power == pytest.approx(0.12)
    assert c.waveguide.length == pytest.approx(0.0109)
    assert c.calibration.gamma == pytest.approx(320.0)
    assert c.signal_detector.dark_per_gate == pytest.approx(4e-5)
    assert c.idler_detector.efficiency == pytest.approx(0.11)
    assert c.schedule.pulses_per_gate == 20
    assert len(c.sweeps.idler_temperatures) == 21
    assert c.sweeps.idler_temperatures[0] == pytest.approx(11.8)
    assert c.sweeps.idler_temperatures[-1] == pytest.approx(13.8)
    assert len(c.sweeps.mu_grid) == 25
    assert c.sweeps.mu_grid[0] == pytest.approx(5e-4) and c.sweeps.mu_grid[-1] == pytest.approx(0.2)
    assert c.calibration.kappa * (c.calibration.gamma * 0.12 * c.calibration.l_eff) ** 2 == pytest.approx(0.1)


def test_analyzers_only_in_fringe_scenario():
    assert paper_config("car").signal_analyzer is None
    f = paper_config(Scenario.FRINGE)
    assert f.with_analyzers and f.for_scenario("car").idler_analyzer is None


def test_digest_stable_and_sensitive():
    assert paper_config().digest() == paper_config().digest()
    other = parse_config(edited("peak_power_mw = 120.0", "peak_power_mw = 121.0"))
    assert other.digest() != paper_config().digest()


@pytest.mark.parametrize(
    "old,new,key",
    [
        ("dark_per_gate = 4e-5", "dark_per_gate = -1", "signal_detector"),
        ("loss_db = 13.5", 'loss_db = "x"', "signal_channel.loss_db"),
        ("peak_power_mw = 120.0", "", "pump.peak_power_mw"),
        ('mode = "silicon"', 'mode = "plasma"', "noise.mode"),
        ("[schedule]", "[schedule_x]", "schedule"),
    ],
)
def test_errors_name_the_key(old, new, key):
    with pytest.raises(ConfigError) as e:
        parse_config(edited(old, new), "fringe")
    assert e.value.key.startswith(key)


def test_fringe_needs_analyzer_sections():
    text = preset_text("paper").replace("[signal_analyzer]", "[unused_signal_analyzer]")
    parse_config(text, "car")
    with pytest.raises(ConfigError) as e:
        parse_config(text, "fringe")
    assert e.value.key == "signal_analyzer"


def test_bad_toml_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config("[pump\n")
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.toml"))


def test_load_from_path(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(preset_text("paper"))
    assert load_config(str(p)).digest() == paper_config().digest()


def test_explicit_grid_and_l_eff_override():
    c = parse_config(edited("[car]", "[car]\nmu = [0.001, 0.01]"))
    assert c.sweeps.mu_grid == (0.001, 0.01)
    c = parse_config(edited("[calibration]", "[calibration]\nl_eff_cm = 0.76"))
    assert c.calibration.l_eff == pytest.approx(0.0076)
    assert math.isfinite(c.calibration.kappa)
