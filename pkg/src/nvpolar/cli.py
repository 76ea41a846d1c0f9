"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
Angles are degrees on the command line and in output files.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import assignment, fitting, optimizer
from .config import ConfigError, RunConfig, load_config
from .geometry import FAMILY_LABELS, UnitVec3, canonical_families
from .photophysics import DegenerateConfigurationError, family_weights
from .zeeman import OverlapWarning, Spectrum, build_spectrum_model, default_grid, family_contrast, synthesize_spectrum

logger = logging.getLogger("nvpolar")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

TARGET_NAMES = {"R": "relative_contrast", "chi": "chi"}
CONSTRAINT_NAMES = {"planes": "planes_of_experiment", "free": "unconstrained"}


class UsageError(Exception):
    pass


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _gnuplot_sweep(csv_name: str, mode: str) -> str:
    xlabel = "polarizer angle (deg)" if mode == "polarizer_sweep" else "laser polarization angle (deg)"
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        "set ylabel 'relative contribution R'",
        "set xrange [0:180]",
        f"plot for [k=2:5] '{csv_name}' using 1:k with lines",
    ]
    return "\n".join(lines) + "\n"


def _gnuplot_spectrum(csv_name: str) -> str:
    return (
        "set datafile separator ','\n"
        "set xlabel 'frequency (Hz)'\n"
        "set ylabel 'normalized PL'\n"
        f"plot '{csv_name}' using 1:2 every ::1 with points pt 7 ps 0.3 title 'spectrum'\n"
    )


def cmd_sweep(cfg: RunConfig, mode: str) -> dict:
    families = canonical_families()
    if mode == "polarizer":
        result = optimizer.sweep_polarizer(
            families, cfg.photophysics, UnitVec3.of(cfg.sweep.laser_polarization), n_angles=cfg.sweep.n_angles
        )
    else:
        result = optimizer.sweep_laser(
            families, cfg.photophysics, UnitVec3.of(cfg.sweep.polarizer_axis), n_angles=cfg.sweep.n_angles
        )
    out = Path(cfg.output_dir)
    name = f"sweep_{mode}"
    paths = [
        _write(out / f"{name}.csv", result.to_csv()),
        _write(out / f"s0_{mode}.csv", result.s0_csv()),
        _write(out / f"{name}.gp", _gnuplot_sweep(f"{name}.csv", result.mode)),
    ]
    r = result.relative_contribution
    s0 = result.s0
    summary = {
        "mode": result.mode,
        "max_R": float(np.nanmax(r)),
        "min_R": float(np.nanmin(r)),
        "s0_swing": float((np.nanmax(s0) - np.nanmin(s0)) / np.nanmax(s0)),
        "suppressed": {
            k: math.degrees(v) for k, v in assignment.identify_family_by_suppression(result).items()
        },
        "files": [str(p) for p in paths],
    }
    return summary


def _fit_report(fit: fitting.FitResult, model, assignment_error: str | None) -> dict:
    peaks = []
    for k, peak in enumerate(fit.model.peaks):
        peaks.append(
            {
                "center_hz": peak.center_nu,
                "fwhm_hz": peak.fwhm_a,
                "contrast": peak.contrast_c,
                "ci95_center_hz": float(fit.ci95[k, 0]),
                "ci95_fwhm_hz": float(fit.ci95[k, 1]),
                "ci95_contrast": float(fit.ci95[k, 2]),
            }
        )
    return {
        "peaks": peaks,
        "residual_rms": fit.residual_rms,
        "family_map": list(model.family_of_peak) if model is not None else None,
        "family_contrast": family_contrast(model) if model is not None else None,
        "assignment_error": assignment_error,
    }


def _assign(fit, cfg: RunConfig):
    try:
        ci = assignment.splitting_ci_from_fit(fit, cfg.constants)
        model = assignment.assign_peaks_to_families(
            fit.model, cfg.field, canonical_families(), cfg.constants, splitting_ci95=ci
        )
        return model, None
    except assignment.AssignmentError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_synth_fit(cfg: RunConfig) -> dict:
    if cfg.noise_sigma > 0 and cfg.seed is None:
        raise UsageError("seed: required for noisy synthesis (pass --seed or set 'seed')")
    families = canonical_families()
    try:
        weights = family_weights(cfg.photophysics, families, cfg.laser_polarization, cfg.polarizer_axis)
    except DegenerateConfigurationError as exc:
        raise UsageError(f"laser_polarization/polarizer_axis: {exc}") from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OverlapWarning)
        truth = build_spectrum_model(cfg.field, families, weights, cfg.linewidth_hz, cfg.constants)
    overlap = [str(w.message) for w in caught if issubclass(w.category, OverlapWarning)]
    if cfg.spectrum.f_min_hz is not None or cfg.spectrum.f_max_hz is not None:
        auto = default_grid(cfg.field, cfg.linewidth_hz, cfg.spectrum.n_points, cfg.constants)
        lo = cfg.spectrum.f_min_hz if cfg.spectrum.f_min_hz is not None else auto[0]
        hi = cfg.spectrum.f_max_hz if cfg.spectrum.f_max_hz is not None else auto[-1]
        if not hi > lo:
            raise UsageError("spectrum.f_max_hz: must exceed spectrum.f_min_hz")
        grid = np.linspace(lo, hi, cfg.spectrum.n_points)
    else:
        grid = default_grid(cfg.field, cfg.linewidth_hz, cfg.spectrum.n_points, cfg.constants)
    spectrum = synthesize_spectrum(truth, grid, cfg.noise_sigma, cfg.seed or 0)

    out = Path(cfg.output_dir)
    spec_path = _write(out / "spectrum.csv", spectrum.to_csv())
    _write(out / "spectrum.gp", _gnuplot_spectrum("spectrum.csv"))

    init = "peak_detection"
    try:
        fit = fitting.fit_spectrum(spectrum)
    except fitting.PeakDetectionFailed as exc:
        logger.warning("%s; seeding the fit with the generating model", exc)
        init = "generating_model"
        fit = fitting.fit_spectrum(spectrum, initial_guess=truth)
    model, err = _assign(fit, cfg)
    report = _fit_report(fit, model, err)
    analytic = weights.by_label("contrast")
    report["analytic_contrast"] = analytic
    if model is not None:
        fitted = family_contrast(model)
        dev = {k: fitted[k] - analytic[k] for k in FAMILY_LABELS}
        report["contrast_deviation"] = dev
        report["max_abs_contrast_deviation"] = max(abs(v) for v in dev.values())
    else:
        report["contrast_deviation"] = None
        report["max_abs_contrast_deviation"] = None
    report["initial_guess"] = init
    report["overlap_warnings"] = overlap
    report["settings"] = {
        "field_t": list(cfg.field.vector),
        "laser_polarization": UnitVec3.of(cfg.laser_polarization).tolist(),
        "polarizer_axis": UnitVec3.of(cfg.polarizer_axis).tolist(),
        "linewidth_hz": cfg.linewidth_hz,
        "noise_sigma": cfg.noise_sigma,
        "seed": cfg.seed,
    }
    report_path = _write(out / "synth_fit.json", _dump(report))
    return {"spectrum": str(spec_path), "report": str(report_path)}


def read_spectrum(path: Path) -> Spectrum:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return Spectrum.from_csv(text)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def fit_file(path: Path, cfg: RunConfig, use_field: bool, normalize: bool = True) -> dict:
    """Read, normalize, fit and optionally assign a spectrum CSV."""
    spectrum = read_spectrum(path)
    if normalize:
        try:
            spectrum = fitting.normalize_spectrum(spectrum)
        except ValueError as exc:
            raise UsageError(f"{path}: {exc}") from None
    fit = fitting.fit_spectrum(spectrum)
    if use_field:
        model, err = _assign(fit, cfg)
    else:
        model, err = None, None
    return _fit_report(fit, model, err)


def cmd_fit(path: Path, cfg: RunConfig, use_field: bool, normalize: bool = True) -> dict:
    report = fit_file(path, cfg, use_field, normalize)
    report_path = _write(Path(cfg.output_dir) / "fit_report.json", _dump(report))
    return {"report": str(report_path)}


def cmd_optimize(cfg: RunConfig, target: str, family: str, constraint: str) -> dict:
    opt = optimizer.optimize(
        canonical_families(),
        target=TARGET_NAMES[target],
        family=family,
        constraint=CONSTRAINT_NAMES[constraint],
        grid_deg=cfg.optimize.grid_deg,
        refine=cfg.optimize.refine,
        threads=cfg.threads,
    )
    report = optimizer.improvement_report(opt, optimizer.baseline_weights(cfg.photophysics))
    path = _write(Path(cfg.output_dir) / "optimum.json", optimizer.optimum_json(opt, report))
    return {"value": opt.value, "improvement": report["ratio"], "file": str(path)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="RNG seed for noisy synthesis")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--threads", type=int, help="worker threads for grid searches")
    common.add_argument("--grid-deg", type=float, help="grid resolution in degrees (<= 2)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nvpolar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="polarizer or laser-polarization sweep")
    p.add_argument("--mode", choices=("polarizer", "laser"), required=True)

    sub.add_parser("synth-fit", parents=[common], help="synthesize, fit and assign an ODMR spectrum")

    p = sub.add_parser("fit", parents=[common], help="fit a spectrum CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--no-normalize", action="store_true", help="skip top-decile normalization")

    p = sub.add_parser("optimize", parents=[common], help="maximize R or chi of one family")
    p.add_argument("--target", choices=tuple(TARGET_NAMES), required=True)
    p.add_argument("--family", choices=FAMILY_LABELS, required=True)
    p.add_argument("--constraint", choices=tuple(CONSTRAINT_NAMES), default="free")
    return parser


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed: must be non-negative")
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output_dir"] = str(args.out)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
        updates["threads"] = args.threads
    if args.grid_deg is not None:
        if not 0 < args.grid_deg <= 2.0:
            raise ConfigError("grid_deg: must lie in (0, 2]")
        updates["optimize"] = replace(cfg.optimize, grid_deg=args.grid_deg)
    return replace(cfg, **updates)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _apply_flags(load_config(args.config), args)
        if args.command == "sweep":
            summary = cmd_sweep(cfg, args.mode)
        elif args.command == "synth-fit":
            summary = cmd_synth_fit(cfg)
        elif args.command == "fit":
            use_field = args.config is not None
            summary = cmd_fit(args.csv, cfg, use_field, normalize=not args.no_normalize)
        else:
            summary = cmd_optimize(cfg, args.target, args.family, args.constraint)
    except (ConfigError, UsageError) as exc:
        print(f"nvpolar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except fitting.FitError as exc:
        print(f"nvpolar: fit failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(_dump(summary), end="")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
