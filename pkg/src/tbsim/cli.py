"""Command line front end: ``tbsim {gamma,pair-sweep,car,fringe,validate}``.

Every run that writes files also writes ``<scenario>_summary.json`` holding a
manifest (config hash, seed, engine, gate count, version, and the sha256 of
each CSV) plus the hash of that manifest, so outputs can be checked later with
:func:`verify_summary`.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import FitError, UndefinedEstimate, compute_car, estimate_gamma_from_sweep, fit_fringe, infer_mu_from_record, subtract_accidentals
from .config import ConfigError, ExperimentConfig, parse_config, read_config_text, text_digest
from .engines import analytic_car_curve, analytic_fringe_scan, mc_car_curve, mc_fringe_scan, mc_run
from .engines.montecarlo import point_seed
from .photonics import CoherenceConvention, coherence_time, effective_length, gamma_coefficient
from .source import mean_pairs_per_pulse

FLOAT_FMT = "%.8e"  # nine significant digits


class NumericError(RuntimeError):
    pass


# ------------------------------------------------------------------ output

def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(_canonical(manifest)).hexdigest()


def write_summary(out: Path, scenario: str, args, config_text: str, outputs: Sequence[Path], results: dict) -> Path:
    manifest = {
        "tool": "tbsim",
        "version": __version__,
        "scenario": scenario,
        "config_path": args.config,
        "config_sha256": text_digest(config_text),
        "engine": args.engine,
        "seed": args.seed,
        "gates": args.gates,
        "outputs": [{"path": p.name, "sha256": file_sha256(p)} for p in outputs],
    }
    doc = {"manifest": manifest, "manifest_sha256": manifest_hash(manifest), "results": _json_safe(results)}
    path = out / f"{scenario}_summary.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def verify_summary(path: Path) -> bool:
    """True when the manifest hash and every listed output hash still match."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    m = doc["manifest"]
    if manifest_hash(m) != doc["manifest_sha256"]:
        return False
    return all(file_sha256(path.parent / o["path"]) == o["sha256"] for o in m["outputs"])


# ---------------------------------------------------------------- commands

def _load(args, scenario: str) -> tuple[ExperimentConfig, str]:
    text = read_config_text(args.config)
    return parse_config(text, scenario), text


def _uses(args, engine: str) -> bool:
    return args.engine in (engine, "both")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gamma(args) -> int:
    cfg, _ = _load(args, "car")
    g = gamma_coefficient(cfg.waveguide, cfg.gamma_wavelength)
    l_eff = effective_length(cfg.waveguide)
    print(f"gamma = {g.per_w_km:.4e} /(W km) at {cfg.gamma_wavelength * 1e9:.1f} nm")
    print(f"L_eff = {l_eff * 100:.4f} cm (physical length {cfg.waveguide.length * 100:.3f} cm)")
    print(f"kappa = {cfg.calibration.kappa:.6g} (source gamma {cfg.calibration.gamma * 1e3:.4g} /(W km))")
    for conv in CoherenceConvention:
        tc = coherence_time(args.filter_ghz * 1e9, conv)
        print(f"coherence time ({conv.value}, {args.filter_ghz:g} GHz) = {tc * 1e12:.2f} ps")
    return 0


def cmd_pair_sweep(args) -> int:
    cfg, text = _load(args, "pair_sweep")
    out = _out_dir(args)
    header = ["power_mw", "mu_per_pulse", "mu_per_double_pulse"]
    if _uses(args, "mc"):
        header += ["mu_mc_per_pulse", "mu_mc_err"]
    if not cfg.sweeps.power_grid:
        raise ConfigError("pair_sweep.power_mw", "empty power grid")
    rows, points = [], []
    for p, power in enumerate(cfg.sweeps.power_grid):
        pump = dataclasses.replace(cfg.pump, peak_power=power)
        mu = mean_pairs_per_pulse(cfg.calibration, pump)
        row = [power * 1e3, mu, 2 * mu]
        if _uses(args, "mc"):
            c = dataclasses.replace(cfg, pump=pump)
            rec = mc_run(c, args.gates, point_seed(args.seed, p), threads=args.threads)
            est = infer_mu_from_record(rec, c)
            row += [est.mu, est.sigma]
            points.append((power, est.mu))
        else:
            points.append((power, mu))
        rows.append(row)
    csv_path = out / "pair_sweep.csv"
    write_csv(csv_path, header, rows)
    fit = estimate_gamma_from_sweep(points, cfg.calibration.l_eff, cfg.calibration.kappa)
    results = {"gamma_fit_per_w_km": fit.gamma_per_w_km, "gamma_fit_residual": fit.residual, "kappa": fit.kappa}
    summary = write_summary(out, "pair_sweep", args, text, [csv_path], results)
    print(f"gamma from sweep = {fit.gamma_per_w_km:.4e} /(W km); wrote {csv_path} and {summary}")
    return 0


def cmd_car(args) -> int:
    cfg, text = _load(args, "car")
    out = _out_dir(args)
    mu = np.asarray(cfg.sweeps.mu_grid, dtype=float)
    if mu.size == 0:
        raise ConfigError("car.mu", "empty mu grid")
    curve = analytic_car_curve(cfg, mu)
    header = ["mu_idler", "car_analytic"]
    results = {"mu_star": curve.mu_star, "car_star": curve.car_star}
    cols = [mu, curve.car]
    if _uses(args, "mc"):
        header += ["car_mc", "car_mc_err"]
        car_mc, err = [], []
        for rec in mc_car_curve(cfg, mu, args.gates, args.seed, threads=args.threads):
            try:
                est = compute_car(rec)
                car_mc.append(est.car)
                err.append(est.sigma)
            except UndefinedEstimate:
                car_mc.append(math.nan)
                err.append(math.nan)
        car_mc = np.array(car_mc)
        cols += [car_mc, np.array(err)]
        if np.all(np.isnan(car_mc)):
            raise NumericError("no MC point has a defined CAR; increase --gates")
        k = int(np.nanargmax(car_mc))
        results.update(mc_peak_mu=mu[k], mc_peak_car=car_mc[k], mc_peak_car_err=err[k])
    csv_path = out / "car.csv"
    write_csv(csv_path, header, zip(*[c.tolist() for c in cols]))
    summary = write_summary(out, "car", args, text, [csv_path], results)
    print(f"peak CAR {curve.car_star:.2f} at mu = {curve.mu_star:.3e}; wrote {csv_path} and {summary}")
    return 0


def _fit_pair(x, counts, acc, period) -> dict:
    raw = fit_fringe(x, counts, period=period)
    _, sub = subtract_accidentals(x, counts, acc, period=period)
    return {
        "v_raw": raw.visibility,
        "v_raw_err": raw.sigma_visibility,
        "v_subtracted": sub.visibility,
        "v_subtracted_err": sub.sigma_visibility,
    }


def cmd_fringe(args) -> int:
    cfg, text = _load(args, "fringe")
    out = _out_dir(args)
    temps = np.asarray(cfg.sweeps.idler_temperatures, dtype=float)
    if len(temps) < 5:
        raise ConfigError("fringe.idler_temperature_c", "need at least 5 idler temperatures for a fit")
    if not cfg.sweeps.signal_temperatures:
        raise ConfigError("fringe.signal_temperatures_c", "no signal temperatures given")
    mu = cfg.sweeps.mu_per_qubit
    period = 2 * math.pi / cfg.idler_analyzer.temp_to_phase
    outputs, results = [], {"mu_per_qubit": mu, "period_c": period, "signal": []}
    for t_s in cfg.sweeps.signal_temperatures:
        c = cfg.for_scenario("fringe", (cfg.signal_analyzer.at_temperature(t_s), cfg.idler_analyzer))
        scan = analytic_fringe_scan(c, temps, mu=mu)
        header = ["idler_temperature_c", "theta_i_rad", "coinc_analytic", "acc_analytic"]
        cols = [temps, scan.theta_i, scan.coincidence, scan.accidental]
        entry = {"signal_temperature_c": t_s, "theta_s_rad": scan.theta_s}
        if _uses(args, "analytic"):
            entry["analytic"] = _fit_pair(temps, scan.coincidence, scan.accidental, period)
        if _uses(args, "mc"):
            recs = mc_fringe_scan(c, temps, args.gates, args.seed, mu=mu, threads=args.threads)
            counts = np.array([r.coincidences[1, 1] for r in recs], dtype=float)
            acc = np.array([r.accidentals[1, 1] / r.accidental_trials * r.gates for r in recs])
            header += ["coinc_mc", "acc_mc"]
            cols += [counts, acc]
            entry["mc"] = _fit_pair(temps, counts, acc, period)
        path = out / f"fringe_signal_{t_s:.2f}C.csv"
        write_csv(path, header, zip(*[np.asarray(col, dtype=float).tolist() for col in cols]))
        outputs.append(path)
        results["signal"].append(entry)
    summary = write_summary(out, "fringe", args, text, outputs, results)
    for e in results["signal"]:
        for eng in ("analytic", "mc"):
            if eng in e:
                f = e[eng]
                print(f"T_s = {e['signal_temperature_c']:.2f} C [{eng}]: V_raw = {f['v_raw']:.4f} +- {f['v_raw_err']:.4f}, "
                      f"V_sub = {f['v_subtracted']:.4f} +- {f['v_subtracted_err']:.4f}")
    print(f"wrote {len(outputs)} CSV files and {summary}")
    return 0


def cmd_validate(args) -> int:
    from .acceptance import run_all

    results = run_all()
    failed = [c.name for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="paper", help="TOML config path or preset name (default: paper)")
    common.add_argument("--engine", choices=("analytic", "mc", "both"), default="analytic")
    common.add_argument("--gates", type=int, default=10**7, help="MC gates per point")
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=None, help="MC worker threads (default: TBSIM_THREADS or CPU count)")

    p = argparse.ArgumentParser(prog="tbsim", description="Time-bin photon-pair source simulator.")
    p.add_argument("--version", action="version", version=f"tbsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gamma", parents=[common], help="nonlinearity, effective length, coherence times")
    g.add_argument("--filter-ghz", type=float, default=25.0, help="filter FWHM for coherence times")
    g.set_defaults(func=cmd_gamma)
    sub.add_parser("pair-sweep", parents=[common], help="pairs per pulse against pump power").set_defaults(func=cmd_pair_sweep)
    sub.add_parser("car", parents=[common], help="CAR against pairs per pulse").set_defaults(func=cmd_car)
    sub.add_parser("fringe", parents=[common], help="two-photon fringes against idler temperature").set_defaults(func=cmd_fringe)
    sub.add_parser("validate", parents=[common], help="run the acceptance checks").set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.gates <= 0:
        print("error: gates: must be positive", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads <= 0:
        print("error: threads: must be positive", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (FitError, UndefinedEstimate, NumericError, FloatingPointError, ArithmeticError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
