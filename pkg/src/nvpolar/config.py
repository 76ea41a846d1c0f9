"""Strict JSON run configuration for the command-line front end."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .geometry import BASELINE_LASER, BASELINE_POLARIZER, BD_POLARIZER
from .photophysics import PhotophysicsParams
from .zeeman import DEFAULT_FIELD, DEFAULT_LINEWIDTH_HZ, MagneticField, NVConstants


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class SpectrumSettings:
    n_points: int = 2000
    f_min_hz: float | None = None
    f_max_hz: float | None = None


@dataclass(frozen=True)
class SweepSettings:
    n_angles: int = 180
    laser_polarization: tuple = tuple(BASELINE_LASER)
    polarizer_axis: tuple = tuple(BD_POLARIZER)


@dataclass(frozen=True)
class OptimizeSettings:
    grid_deg: float = 1.0
    refine: bool = True


@dataclass(frozen=True)
class RunConfig:
    constants: NVConstants = NVConstants()
    photophysics: PhotophysicsParams = PhotophysicsParams()
    field: MagneticField = DEFAULT_FIELD
    linewidth_hz: float = DEFAULT_LINEWIDTH_HZ
    noise_sigma: float = 0.002
    seed: int | None = None
    laser_polarization: tuple = tuple(BASELINE_LASER)
    polarizer_axis: tuple = tuple(BASELINE_POLARIZER)
    spectrum: SpectrumSettings = SpectrumSettings()
    sweep: SweepSettings = SweepSettings()
    optimize: OptimizeSettings = OptimizeSettings()
    output_dir: str = "nvpolar_out"
    threads: int = 1


REQUIRED_KEYS = ("field",)

_CONSTANT_KEYS = {
    "zero_field_splitting_hz": "zero_field_splitting_d",
    "gyromagnetic_ratio_hz_per_t": "gyromagnetic_ratio_gamma",
}


def _number(value, key, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{key}: must be positive, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(f"{key}: must be non-negative, got {value!r}")
    return float(value)


def _integer(value, key, *, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value!r}")
    return value


def _vector(value, key):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{key}: expected a list of three numbers, got {value!r}")
    vec = tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))
    if not any(vec):
        raise ConfigError(f"{key}: zero vector")
    return vec


def _section(doc, key, allowed):
    sub = doc.get(key, {})
    if not isinstance(sub, dict):
        raise ConfigError(f"{key}: expected an object")
    for name in sub:
        if name not in allowed:
            raise ConfigError(f"{key}.{name}: unknown key")
    return sub


def parse_config(doc: dict) -> RunConfig:
    """Validate a decoded JSON document into a :class:`RunConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    allowed = {f.name for f in fields(RunConfig)}
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{key}: unknown key")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"{key}: missing required key")
    cfg = RunConfig()
    updates = {}

    sub = _section(doc, "constants", _CONSTANT_KEYS)
    if sub:
        kw = {_CONSTANT_KEYS[k]: _number(v, f"constants.{k}", positive=True) for k, v in sub.items()}
        updates["constants"] = replace(cfg.constants, **kw)

    sub = _section(doc, "photophysics", {f.name for f in fields(PhotophysicsParams)})
    if sub:
        kw = {k: _number(v, f"photophysics.{k}", positive=True) for k, v in sub.items()}
        try:
            updates["photophysics"] = replace(cfg.photophysics, **kw)
        except ValueError as exc:
            raise ConfigError(f"photophysics: {exc}") from None

    vec = _vector_allow_zero(doc["field"], "field")
    try:
        updates["field"] = MagneticField(vec)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from None

    if "linewidth_hz" in doc:
        updates["linewidth_hz"] = _number(doc["linewidth_hz"], "linewidth_hz", positive=True)
    if "noise_sigma" in doc:
        updates["noise_sigma"] = _number(doc["noise_sigma"], "noise_sigma", nonneg=True)
    if "seed" in doc and doc["seed"] is not None:
        updates["seed"] = _integer(doc["seed"], "seed", minimum=0)
    for key in ("laser_polarization", "polarizer_axis"):
        if key in doc:
            updates[key] = _vector(doc[key], key)

    sub = _section(doc, "spectrum", {f.name for f in fields(SpectrumSettings)})
    if sub:
        kw = {}
        if "n_points" in sub:
            kw["n_points"] = _integer(sub["n_points"], "spectrum.n_points", minimum=40)
        for k in ("f_min_hz", "f_max_hz"):
            if k in sub and sub[k] is not None:
                kw[k] = _number(sub[k], f"spectrum.{k}", positive=True)
        updates["spectrum"] = replace(cfg.spectrum, **kw)

    sub = _section(doc, "sweep", {f.name for f in fields(SweepSettings)})
    if sub:
        kw = {}
        if "n_angles" in sub:
            kw["n_angles"] = _integer(sub["n_angles"], "sweep.n_angles", minimum=2)
        for k in ("laser_polarization", "polarizer_axis"):
            if k in sub:
                kw[k] = _vector(sub[k], f"sweep.{k}")
        updates["sweep"] = replace(cfg.sweep, **kw)

    sub = _section(doc, "optimize", {f.name for f in fields(OptimizeSettings)})
    if sub:
        kw = {}
        if "grid_deg" in sub:
            kw["grid_deg"] = _grid_deg(sub["grid_deg"], "optimize.grid_deg")
        if "refine" in sub:
            if not isinstance(sub["refine"], bool):
                raise ConfigError(f"optimize.refine: expected true or false, got {sub['refine']!r}")
            kw["refine"] = sub["refine"]
        updates["optimize"] = replace(cfg.optimize, **kw)

    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str) or not doc["output_dir"]:
            raise ConfigError("output_dir: expected a non-empty string")
        updates["output_dir"] = doc["output_dir"]
    if "threads" in doc:
        updates["threads"] = _integer(doc["threads"], "threads", minimum=1)
    return replace(cfg, **updates)


def _vector_allow_zero(value, key):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{key}: expected a list of three numbers, got {value!r}")
    return tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))


def _grid_deg(value, key):
    g = _number(value, key, positive=True)
    if g > 2.0:
        raise ConfigError(f"{key}: must be at most 2 degrees, got {g}")
    return g


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return parse_config(doc)
