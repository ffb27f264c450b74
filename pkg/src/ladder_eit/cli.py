"""
Command-line entry point: ``ladder-eit <command> [options]``.

Commands read an optional JSON configuration document (``--config``);
flags given on the command line override the document.  Every run writes
``manifest.json`` into ``--out`` with the effective settings.

Exit codes: 0 success, 1 usage error, 2 input error, 3 numerical failure
(including a fit that did not converge).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy.constants as sc

from . import __version__
from .analysis import (ScalingContext, find_peaks, isotope_shifts_from_peaks, write_peak_table,
                       write_shift_records)
from .calibration import (CalibrationModel, CalibrationResult, apply_calibration, fit_calibration,
                          satabs_model)
from .catalog import builtin_strontium_catalog, catalog_from_dict, dumps_catalog, load_catalog
from .errors import CatalogError, FitError, IntegrationError
from .fitting import write_trace_csv
from .lineshape import (BeamGeometry, GaussianDistribution, LadderParams, LorentzianDistribution,
                        MultiIsotopeSystem, amplitude_for_peak_absorption, difference_spectrum,
                        gaussian_from_beam, synthesize_spectrum)
from .modelfit import PARAMETER_NAMES, EITModel, fit_eit_spectrum
from .plotting import overlay_svg
from .spectrum import Spectrum, parse_grid, read_spectrum_csv, write_spectrum_csv

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULT_GRID = "-300:200:0.5"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- configuration helpers ---------------------------------------------------

def _load_config(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"config {p}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise UsageError("config document must be a JSON object")
    return doc


def _resolve(args, base=None):
    cfg = dict(base if base is not None else _load_config(args.config))
    for key in ("tol", "grid", "seed", "input", "max_iter", "scaling_rel_uncertainty"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg.setdefault("tol", 1e-6)
    cfg.setdefault("seed", 0)
    try:
        cfg["tol"] = float(cfg["tol"])
    except (TypeError, ValueError):
        raise UsageError("tol: expected a number") from None
    if not 0 < cfg["tol"] <= 1e-2:
        raise UsageError("tol: must lie in (0, 1e-2]")
    return cfg


def _catalog(spec, config_dir=None):
    if spec is None or spec == "builtin":
        return builtin_strontium_catalog()
    try:
        if isinstance(spec, dict):
            return catalog_from_dict(spec)
        path = Path(spec)
        if not path.is_absolute() and config_dir is not None and not path.exists():
            path = Path(config_dir) / path
        if not path.exists():
            raise InputError(f"catalog file not found: {spec}")
        return load_catalog(path)
    except CatalogError as exc:
        raise InputError(f"catalog: {exc}") from None


def _ladder(cfg):
    doc = dict(cfg.get("ladder", {}))
    allowed = {"gamma2", "gamma3", "rabi_c", "delta_c", "lambda_p", "lambda_c", "geometry"}
    unknown = set(doc) - allowed
    if unknown:
        raise UsageError(f"ladder.{sorted(unknown)[0]}: unknown field")
    try:
        return LadderParams(**doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"ladder: {exc}") from None


def _distribution(cfg):
    doc = dict(cfg.get("distribution", {"kind": "lorentzian", "delta_v": 16.5}))
    kind = doc.pop("kind", "lorentzian")
    amplitude = float(doc.pop("amplitude", 1.0))
    try:
        if kind == "lorentzian":
            return LorentzianDistribution(float(doc["delta_v"]), amplitude)
        if kind == "gaussian":
            return GaussianDistribution(float(doc["sigma_v"]), amplitude)
        if kind == "beam":
            geom = BeamGeometry(float(doc["temperature_k"]), float(doc["atomic_mass_u"]) * sc.atomic_mass,
                                float(doc["half_divergence_rad"]))
            return gaussian_from_beam(geom, amplitude)
    except KeyError as exc:
        raise UsageError(f"distribution.{exc.args[0]}: missing field") from None
    except (TypeError, ValueError) as exc:
        raise UsageError(f"distribution: {exc}") from None
    raise UsageError(f"distribution.kind: unknown kind {kind!r}")


def _mass_map(doc, name, cast):
    try:
        return {int(k): cast(v) for k, v in (doc or {}).items()}
    except (TypeError, ValueError):
        raise UsageError(f"{name}: keys must be mass numbers") from None


def _system(cfg, catalog):
    dist = _distribution(cfg)
    try:
        system = MultiIsotopeSystem(
            catalog, _ladder(cfg), dist,
            rydberg_shifts_mhz=_mass_map(cfg.get("rydberg_shifts_mhz"), "rydberg_shifts_mhz", float),
            coupling_active=(_mass_map(cfg["coupling_active"], "coupling_active", bool)
                             if "coupling_active" in cfg else None))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return system


def _grid(cfg):
    try:
        return parse_grid(str(cfg.get("grid", DEFAULT_GRID)))
    except ValueError as exc:
        raise UsageError(f"grid: {exc}") from None


def _input_spectrum(cfg, config_dir, kind=None):
    src = cfg.get("input")
    if src is None:
        raise UsageError("input: no input file given")
    path = Path(src)
    if not path.is_absolute() and not path.exists() and config_dir is not None:
        path = Path(config_dir) / path
    if not path.exists():
        raise InputError(f"input file not found: {src}")
    try:
        return read_spectrum_csv(path, kind=kind)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _write_manifest(out, command, cfg, outputs):
    doc = {"command": command, "version": __version__, "config": cfg,
           "outputs": sorted(str(Path(o).name) for o in outputs)}
    path = out / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str))
    return path


# --- commands ----------------------------------------------------------------

def cmd_simulate(args):
    cfg = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    catalog = _catalog(cfg.get("catalog"), _config_dir(args))
    system = _system(cfg, catalog)
    grid = _grid(cfg)
    tol = cfg["tol"]
    if "peak_absorption" in cfg:
        target = float(cfg["peak_absorption"])
        if not 0 < target < 1:
            raise UsageError("peak_absorption: must lie in (0, 1)")
        amp = amplitude_for_peak_absorption(system, target, grid, tol)
        system = system.replace(distribution=system.distribution.with_amplitude(amp))
        cfg["resolved_amplitude"] = amp

    trans = synthesize_spectrum(system, grid, tol)
    diff = difference_spectrum(system, grid, tol)
    noise = float(cfg.get("noise", 0.0))
    if noise > 0:
        rng = np.random.default_rng(int(cfg["seed"]))
        trans = Spectrum(grid, np.clip(trans.values + rng.normal(0, noise, grid.size), 0, 1))
        diff = Spectrum(grid, diff.values + rng.normal(0, noise, grid.size), kind="difference")
    meta = {"tol": tol, "noise": noise, "seed": int(cfg["seed"]),
            "ladder": asdict(system.shared) | {"geometry": system.shared.geometry.value},
            "distribution": type(system.distribution).__name__,
            "distribution_params": asdict(system.distribution)}
    trans.meta.update(meta)
    diff.meta.update(meta)
    outputs = [write_spectrum_csv(trans, out / "transmission.csv"),
               write_spectrum_csv(diff, out / "difference.csv")]
    outputs.append(overlay_svg(
        out / "simulate.svg",
        [(grid, trans.values, "transmission", "line")], ylabel="Probe transmission",
        secondary=[(grid, diff.values, "with - without coupling", "line")],
        secondary_label="Transmission difference"))

    if "satabs" in cfg:
        sa = cfg["satabs"]
        try:
            model = CalibrationModel(catalog, float(sa.get("hwhm_mhz", 16.0)), float(sa["scaling"]),
                                     float(sa["offset_mhz"]), float(sa["amplitude"]))
            raw = parse_grid(str(sa["raw_grid"]))
        except KeyError as exc:
            raise UsageError(f"satabs.{exc.args[0]}: missing field") from None
        except ValueError as exc:
            raise UsageError(f"satabs: {exc}") from None
        signal = satabs_model(model, raw)
        if noise > 0:
            signal = signal + np.random.default_rng(int(cfg["seed"]) + 1).normal(0, noise, raw.size)
        sat = Spectrum(raw, signal, kind="absorption", meta={"axis": "raw"})
        outputs.append(write_spectrum_csv(sat, out / "satabs.csv", header=("raw_axis", "signal")))
    outputs.append(_write_manifest(out, "simulate", cfg, outputs))
    return EXIT_OK


def cmd_calibrate(args):
    cfg = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    catalog = _catalog(cfg.get("catalog"), _config_dir(args))
    data = _input_spectrum(cfg, _config_dir(args), kind="absorption")
    init = cfg.get("init", {})
    hwhm = float(cfg.get("hwhm_mhz", 16.0))
    guess = (float(init.get("scaling", 1.0)), float(init.get("offset_mhz", 0.0)),
             float(init.get("amplitude", max(data.values.max(), 1e-3))))
    try:
        result = fit_calibration(data, catalog, hwhm, guess)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except FitError as exc:
        raise NumericalFailure(f"calibration fit failed: {exc}") from None
    result.save(out / "calibration.json")
    model = CalibrationModel(catalog, hwhm, result.scaling, result.offset_mhz, result.amplitude)
    freq = result.to_frequency(data.frequency_mhz)
    outputs = [out / "calibration.json", overlay_svg(
        out / "calibration.svg",
        [(freq, data.values, "data", "dots"),
         (freq, satabs_model(model, data.frequency_mhz), "six-component fit", "line")],
        ylabel="Saturated absorption signal")]
    outputs.append(_write_manifest(out, "calibrate", cfg, outputs))
    print(json.dumps({k: v for k, v in result.as_dict().items() if k != "covariance"}, indent=2))
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_fit(args):
    cfg = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cdir = _config_dir(args)
    catalog = _catalog(cfg.get("catalog"), cdir)
    data = _input_spectrum(cfg, cdir, kind="transmission")
    if "calibration" in cfg:
        cal_path = Path(cfg["calibration"])
        if not cal_path.exists() and cdir is not None:
            cal_path = Path(cdir) / cal_path
        if not cal_path.exists():
            raise InputError(f"calibration file not found: {cfg['calibration']}")
        data = apply_calibration(data, CalibrationResult.load(cal_path))
    model = EITModel(
        catalog, _ladder(cfg),
        _mass_map(cfg.get("rydberg_shifts_mhz"), "rydberg_shifts_mhz", float),
        _mass_map(cfg["coupling_active"], "coupling_active", bool) if "coupling_active" in cfg else None)
    init = cfg.get("init")
    if not isinstance(init, dict):
        raise UsageError("init: expected an object with " + ", ".join(PARAMETER_NAMES))
    missing = [k for k in PARAMETER_NAMES if k not in init]
    if missing:
        raise UsageError(f"init.{missing[0]}: missing field")
    bounds = {k: tuple(v) for k, v in cfg.get("bounds", {}).items()}
    max_iter = int(cfg.get("max_iter", 50))
    if max_iter < 0:
        raise UsageError("max_iter: must be >= 0")
    try:
        result = fit_eit_spectrum(data, model, init, bounds=bounds, max_iter=max_iter)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except (FitError, IntegrationError) as exc:
        raise NumericalFailure(f"fit failed: {exc}") from None
    doc = result.as_dict()
    (out / "fit.json").write_text(json.dumps(doc, indent=2))
    write_trace_csv(result, out / "fit_trace.csv")
    best = model.transmission(result.params, data.frequency_mhz)
    off = synthesize_spectrum(model.system(result.params).with_coupling_off(), data.frequency_mhz).values
    outputs = [out / "fit.json", out / "fit_trace.csv", overlay_svg(
        out / "fit.svg",
        [(data.frequency_mhz, data.values, "data", "dots"),
         (data.frequency_mhz, best, "model", "line")],
        ylabel="Probe transmission",
        secondary=[(data.frequency_mhz, best - off, "model minus coupling-off model", "line")],
        secondary_label="Transmission difference")]
    outputs.append(_write_manifest(out, "fit", cfg, outputs))
    print(json.dumps({"params": doc["params"], "converged": doc["converged"]}, indent=2))
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def cmd_analyze(args):
    cfg = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cdir = _config_dir(args)
    catalog = _catalog(cfg.get("catalog"), cdir)
    diff = _input_spectrum(cfg, cdir, kind="difference")
    ctx = ScalingContext(float(cfg.get("lambda_p", 460.7e-9)), float(cfg.get("lambda_c", 420e-9)))
    expected = _mass_map(cfg.get("assignments"), "assignments", float)
    peaks = find_peaks(diff, float(cfg.get("min_height", 0.0)), float(cfg.get("min_separation_mhz", 10.0)),
                       expected_positions=expected or None,
                       attribution_window_mhz=cfg.get("attribution_window_mhz"))
    if "max_peaks" in cfg:
        peaks = peaks[:int(cfg["max_peaks"])]
    pairs = [tuple(int(m) for m in p) for p in cfg.get("pairs", [])]
    for a, b in pairs:
        for m in (a, b):
            if m not in catalog:
                raise UsageError(f"pairs: mass number {m} not in catalog")
    shifts = isotope_shifts_from_peaks(
        peaks, catalog, pairs, ctx, float(cfg.get("scaling_rel_uncertainty", 0.0)),
        str(cfg.get("transition", "")), float(cfg.get("position_uncertainty_mhz", 0.0)))
    outputs = [write_peak_table(peaks, out / "peaks.csv"), write_shift_records(shifts, out / "shifts.json")]
    outputs.append(_write_manifest(out, "analyze", cfg, outputs))
    for r in shifts:
        print(f"{r.transition_label}  {r.pair[0]} - {r.pair[1]}: {r.shift_mhz:.2f} +/- {r.uncertainty_mhz:.2f} MHz")
    return EXIT_OK


def cmd_catalog(args):
    if args.action == "show":
        print(dumps_catalog(_catalog(args.path or "builtin")))
        return EXIT_OK
    if args.path is None:
        raise UsageError("catalog validate needs a path")
    cat = _catalog(args.path)
    total = sum(iso.abundance for iso in cat.isotopes)
    print(f"ok: {len(cat.isotopes)} isotopes, {sum(1 for _ in cat.lines())} components, "
          f"abundance sum {total:.4f}")
    return EXIT_OK


def _config_dir(args):
    return Path(args.config).parent if getattr(args, "config", None) else None


def build_parser():
    parser = _Parser(prog="ladder-eit", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, grid=True):
        p.add_argument("--config", help="JSON configuration document")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, help="relative quadrature tolerance")
        if grid:
            p.add_argument("--grid", help="frequency grid start:stop:step in MHz")
        p.add_argument("--seed", type=int, help="seed for synthetic noise")
        return p

    p = common(sub.add_parser("simulate", help="synthesise transmission and difference spectra"))
    p.set_defaults(func=cmd_simulate)
    p = common(sub.add_parser("calibrate", help="fit the frequency axis to a saturated-absorption scan"))
    p.add_argument("--input", help="CSV with raw_axis,signal columns")
    p.set_defaults(func=cmd_calibrate)
    p = common(sub.add_parser("fit", help="fit the five-parameter EIT model"))
    p.add_argument("--input", help="transmission CSV")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.set_defaults(func=cmd_fit)
    p = common(sub.add_parser("analyze", help="locate EIT peaks and extract isotope shifts"))
    p.add_argument("--input", help="difference CSV")
    p.add_argument("--scaling-uncertainty", dest="scaling_rel_uncertainty", type=float,
                   help="relative frequency-axis scaling uncertainty, e.g. 0.03")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("catalog", help="show or validate an isotope catalog")
    p.add_argument("action", choices=["show", "validate"])
    p.add_argument("path", nargs="?")
    p.set_defaults(func=cmd_catalog)
    return parser


def _join_grid(argv):
    # "--grid -60:30:0.1" would read as an unknown option; glue it to its flag.
    out, it = [], iter(argv)
    for a in it:
        if a == "--grid":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--grid={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_join_grid(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, IntegrationError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
