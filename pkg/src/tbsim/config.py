"""Experiment description and the TOML config loader.

Config keys carry their unit in the name (``peak_power_mw``, ``loss_db``,
``detuning_ghz``); everything is converted to SI on load.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .detection import ChannelSpec, DetectorSpec, GateSchedule
from .photonics import WaveguideSpec, effective_length
from .source import NoiseProfile, PumpConfig, SourceCalibration, calibrate_kappa
from .timebin import AnalyzerSpec


class ConfigError(ValueError):
    """Invalid or missing configuration value; ``key`` names the offender."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class Scenario(str, Enum):
    PAIR_SWEEP = "pair_sweep"
    CAR = "car"
    FRINGE = "fringe"


@dataclass(frozen=True)
class SweepSettings:
    """Grids used by the figure-style runs."""

    power_grid: tuple = ()  # W
    mu_grid: tuple = ()  # pairs per pulse
    mu_per_qubit: float = 0.1
    signal_temperatures: tuple = ()  # degC
    idler_temperatures: tuple = ()  # degC


@dataclass(frozen=True)
class ExperimentConfig:
    pump: PumpConfig
    waveguide: WaveguideSpec
    calibration: SourceCalibration
    noise: NoiseProfile
    signal_channel: ChannelSpec
    idler_channel: ChannelSpec
    signal_detector: DetectorSpec
    idler_detector: DetectorSpec
    schedule: GateSchedule
    scenario: Scenario = Scenario.CAR
    signal_analyzer: Optional[AnalyzerSpec] = None
    idler_analyzer: Optional[AnalyzerSpec] = None
    sweeps: SweepSettings = field(default_factory=SweepSettings)
    gamma_wavelength: Optional[float] = None  # m; pump wavelength when unset

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        has = (self.signal_analyzer is not None, self.idler_analyzer is not None)
        if self.scenario is Scenario.FRINGE and not all(has):
            raise ConfigError("signal_analyzer", "fringe scenario needs both analyzers")
        if self.scenario is not Scenario.FRINGE and any(has):
            raise ConfigError("signal_analyzer", f"analyzers must be absent for scenario {self.scenario.value}")

    @property
    def with_analyzers(self) -> bool:
        return self.scenario is Scenario.FRINGE

    def for_scenario(self, scenario: Scenario | str, analyzers=None) -> "ExperimentConfig":
        """Copy switched to ``scenario``; ``analyzers`` is a (signal, idler) pair for fringe runs."""
        scenario = Scenario(scenario)
        sa, ia = analyzers if analyzers is not None else (self.signal_analyzer, self.idler_analyzer)
        if scenario is not Scenario.FRINGE:
            sa = ia = None
        return dataclasses.replace(self, scenario=scenario, signal_analyzer=sa, idler_analyzer=ia)

    def digest(self) -> str:
        """Stable hash of the full parameter set."""
        blob = json.dumps(_plain(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float):
        return repr(obj)
    return obj


# ---------------------------------------------------------------- loading

PRESETS = ("paper",)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError("config", f"unknown preset {name!r}")
    return resources.files("tbsim.presets").joinpath(f"{name}.toml").read_text()


class _Section:
    def __init__(self, doc: dict, name: str, required: bool = True):
        if name not in doc:
            if required:
                raise ConfigError(name, "missing section")
            doc = {name: {}}
        self.name = name
        self.data = dict(doc[name])
        if not isinstance(self.data, dict):
            raise ConfigError(name, "must be a table")

    def get(self, key, default=..., kind=float):
        if key not in self.data:
            if default is ...:
                raise ConfigError(f"{self.name}.{key}", "missing key")
            return default
        v = self.data[key]
        try:
            if kind is float:
                if isinstance(v, bool):
                    raise TypeError
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError
            elif kind is list:
                v = tuple(float(x) for x in v)
            else:
                v = kind(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.name}.{key}", f"bad value {v!r}") from None
        return v


def _grid(sec: _Section, key: str, scale: float, log: bool = False) -> tuple:
    if key in sec.data:
        return tuple(scale * x for x in sec.get(key, kind=list))
    lo, hi, num = sec.get(f"{key}_min", None), sec.get(f"{key}_max", None), sec.get(f"{key}_num", 0, int)
    if lo is None or hi is None or num <= 0:
        return ()
    if num == 1:
        return (scale * lo,)
    if log:
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"{sec.name}.{key}_min", "log grid needs positive bounds")
        pts = [lo * (hi / lo) ** (k / (num - 1)) for k in range(num)]
    else:
        pts = [lo + (hi - lo) * k / (num - 1) for k in range(num)]
    return tuple(scale * x for x in pts)


def _build(doc: dict, scenario: Scenario | str) -> ExperimentConfig:
    scenario = Scenario(scenario)

    def checked(key, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(key, str(e)) from None

    p = _Section(doc, "pump")
    pump = checked(
        "pump",
        PumpConfig,
        wavelength=p.get("wavelength_nm") * 1e-9,
        peak_power=p.get("peak_power_mw") * 1e-3,
        pulse_width=p.get("pulse_width_ps") * 1e-12,
        pulse_interval=p.get("pulse_interval_ns") * 1e-9,
        rep_rate=p.get("rep_rate_mhz") * 1e6,
        pump_phase=p.get("pump_phase_rad", 0.0),
    )

    w = _Section(doc, "waveguide")
    wg = checked(
        "waveguide",
        WaveguideSpec,
        n2=w.get("n2_m2_per_w"),
        a_eff=w.get("a_eff_um2") * 1e-12,
        length=w.get("length_cm") * 1e-2,
        prop_loss_db=w.get("prop_loss_db", 0.0),
        coupling_loss_db_per_facet=w.get("coupling_loss_db_per_facet", 0.0),
    )

    c = _Section(doc, "calibration")
    gamma = c.get("gamma_per_w_km") * 1e-3
    l_eff = c.get("l_eff_cm", None)
    l_eff = effective_length(wg) if l_eff is None else l_eff * 1e-2
    kappa = c.get("kappa", None)
    if kappa is None:
        kappa = checked(
            "calibration.anchor_power_mw",
            calibrate_kappa,
            gamma,
            l_eff,
            c.get("anchor_power_mw") * 1e-3,
            c.get("anchor_mu"),
        )
    cal = checked("calibration", SourceCalibration, gamma=gamma, l_eff=l_eff, kappa=kappa)

    n = _Section(doc, "noise", required=False)
    noise = checked(
        "noise.mode",
        NoiseProfile,
        mode=n.get("mode", "silicon", str),
        raman_shift=n.get("raman_shift_thz", 15.6) * 1e12,
        raman_width=n.get("raman_width_thz", 0.1) * 1e12,
        mean_per_slot=n.get("mean_per_slot", 0.0),
    )

    def channel(name):
        s = _Section(doc, name)
        override = s.get("loss_db_no_analyzer", None)
        return checked(
            f"{name}.loss_db",
            ChannelSpec,
            loss_db=s.get("loss_db"),
            detuning_from_pump=s.get("detuning_ghz", 0.0) * 1e9,
            loss_db_no_analyzer=override,
        )

    def detector(name):
        s = _Section(doc, name)
        return checked(
            name,
            DetectorSpec,
            efficiency=s.get("efficiency"),
            dark_per_gate=s.get("dark_per_gate"),
            gate_width=s.get("gate_width_ns", 1.4) * 1e-9,
            gate_rate=s.get("gate_rate_mhz", 5.0) * 1e6,
        )

    def analyzer(name):
        s = _Section(doc, name)
        t_ref = s.get("temp_ref_c", 0.0)
        return AnalyzerSpec(
            theta_at_ref=s.get("theta_at_ref_rad", 0.0),
            temp_to_phase=s.get("temp_to_phase_rad_per_c", 2 * math.pi),
            temp_ref=t_ref,
            temperature=s.get("temperature_c", t_ref),
            excess_loss_db=s.get("excess_loss_db", 0.0),
        )

    sch = _Section(doc, "schedule")
    schedule = checked(
        "schedule.gate_rate_mhz",
        GateSchedule,
        pulse_rate=sch.get("pulse_rate_mhz") * 1e6,
        gate_rate=sch.get("gate_rate_mhz") * 1e6,
    )

    ps = _Section(doc, "pair_sweep", required=False)
    cs = _Section(doc, "car", required=False)
    fs = _Section(doc, "fringe", required=False)
    sweeps = SweepSettings(
        power_grid=_grid(ps, "power_mw", 1e-3),
        mu_grid=_grid(cs, "mu", 1.0, log=True),
        mu_per_qubit=fs.get("mu_per_qubit", 0.1),
        signal_temperatures=fs.get("signal_temperatures_c", (), list),
        idler_temperatures=_grid(fs, "idler_temperature_c", 1.0),
    )

    analyzers = (None, None)
    if scenario is Scenario.FRINGE:
        analyzers = (analyzer("signal_analyzer"), analyzer("idler_analyzer"))
    return ExperimentConfig(
        pump=pump,
        waveguide=wg,
        calibration=cal,
        noise=noise,
        signal_channel=channel("signal_channel"),
        idler_channel=channel("idler_channel"),
        signal_detector=detector("signal_detector"),
        idler_detector=detector("idler_detector"),
        schedule=schedule,
        scenario=scenario,
        signal_analyzer=analyzers[0],
        idler_analyzer=analyzers[1],
        sweeps=sweeps,
        gamma_wavelength=w.get("gamma_wavelength_nm", p.get("wavelength_nm")) * 1e-9,
    )


def parse_config(text: str, scenario: Scenario | str = Scenario.CAR) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("config", f"not valid TOML ({e})") from None
    return _build(doc, scenario)


def read_config_text(path_or_preset: str) -> str:
    """File contents, or the bundled preset when given a preset name."""
    if path_or_preset in PRESETS and not Path(path_or_preset).exists():
        return preset_text(path_or_preset)
    try:
        return Path(path_or_preset).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path_or_preset}: {e.strerror}") from None


def load_config(path_or_preset: str, scenario: Scenario | str = Scenario.CAR) -> ExperimentConfig:
    return parse_config(read_config_text(path_or_preset), scenario)


def paper_config(scenario: Scenario | str = Scenario.CAR) -> ExperimentConfig:
    return parse_config(preset_text("paper"), scenario)


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def as_dict(cfg: Any) -> dict:
    return _plain(cfg)
