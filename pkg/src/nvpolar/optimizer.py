"""Polarizer/laser sweeps and search for the best (n_L, n_P) pair.

Both excitation and emission are even in their direction vector, so every
search runs over the upper hemisphere only and every sweep over [0, pi).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import (
    BASELINE_LASER,
    BASELINE_POLARIZER,
    BD_POLARIZER,
    FAMILY_LABELS,
    PolarizationPlane,
    UnitVec3,
    _as_array,
    canonical_families,
    collection_plane,
    family_axes,
    laser_plane,
)
from .photophysics import (
    FamilyWeights,
    PhotophysicsParams,
    excitation_array,
    family_weights,
    weights_table,
)

TARGETS = ("relative_contrast", "chi")
CONSTRAINTS = ("planes_of_experiment", "unconstrained")
SWEEP_MODES = ("polarizer_sweep", "laser_sweep")

_MIN_REFINE_STEP = 1e-4


@dataclass
class SweepResult:
    """Per-angle family figures along one polarization sweep."""

    mode: str
    fixed_vector: UnitVec3
    plane: PolarizationPlane
    angles: np.ndarray
    relative_contribution: np.ndarray  # (n_angles, 4)
    contrast: np.ndarray
    chi: np.ndarray
    rho: np.ndarray
    s0: np.ndarray  # (n_angles,)
    labels: tuple = FAMILY_LABELS

    def __post_init__(self):
        if self.mode not in SWEEP_MODES:
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        a = self.angles
        if len(a) and (np.any(np.diff(a) <= 0) or a[0] < 0 or a[-1] >= math.pi):
            raise ValueError("sweep angles must be strictly increasing within [0, pi)")

    def column(self, name: str, label: str) -> np.ndarray:
        return getattr(self, name)[:, self.labels.index(label)]

    def weights_at(self, index: int) -> dict[str, dict[str, float]]:
        return {
            name: dict(zip(self.labels, map(float, getattr(self, name)[index])))
            for name in ("relative_contribution", "contrast", "chi", "rho")
        }

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        header = ["angle_deg"]
        for prefix in ("R", "C", "chi", "rho"):
            header += [f"{prefix}_{label}" for label in self.labels]
        header.append("S0")
        w.writerow(header)
        for k, angle in enumerate(self.angles):
            row = [_fmt(math.degrees(angle))]
            for name in ("relative_contribution", "contrast", "chi", "rho"):
                row += [_fmt(v) for v in getattr(self, name)[k]]
            row.append(_fmt(self.s0[k]))
            w.writerow(row)
        return buf.getvalue()

    def s0_csv(self) -> str:
        lines = ["angle_deg,S0"]
        lines += [f"{_fmt(math.degrees(a))},{_fmt(s)}" for a, s in zip(self.angles, self.s0)]
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


def sweep_angles(n_angles: int) -> np.ndarray:
    """``n_angles`` equally spaced angles covering [0, pi)."""
    if n_angles < 1:
        raise ValueError("n_angles must be positive")
    return np.arange(n_angles) * (math.pi / n_angles)


def _sweep(mode, families, params, fixed, plane, n_angles) -> SweepResult:
    families = list(families)
    axes = family_axes(families)
    angles = sweep_angles(n_angles)
    swept = plane.vectors(angles)
    fixed_arr = np.broadcast_to(_as_array(fixed), swept.shape)
    if mode == "polarizer_sweep":
        table = weights_table(params, axes, fixed_arr, swept)
    else:
        table = weights_table(params, axes, swept, fixed_arr)
    # extinguished settings carry NaN and are ignored by nan-aware reductions
    return SweepResult(
        mode=mode,
        fixed_vector=UnitVec3.of(_as_array(fixed)),
        plane=plane,
        angles=angles,
        relative_contribution=table["relative_contribution"],
        contrast=table["contrast"],
        chi=table["chi"],
        rho=table["rho"],
        s0=table["s0"],
        labels=tuple(f.label for f in families),
    )


def sweep_polarizer(families=None, params=None, n_L=BASELINE_LASER, plane=None, n_angles=180) -> SweepResult:
    """Rotate the polarizer in the collection plane at fixed laser polarization."""
    return _sweep(
        "polarizer_sweep",
        families or canonical_families(),
        params or PhotophysicsParams(),
        n_L,
        plane or collection_plane(),
        n_angles,
    )


def sweep_laser(families=None, params=None, n_P=BD_POLARIZER, plane=None, n_angles=180) -> SweepResult:
    """Rotate the laser polarization in the laser plane at fixed polarizer axis."""
    return _sweep(
        "laser_sweep",
        families or canonical_families(),
        params or PhotophysicsParams(),
        n_P,
        plane or laser_plane(),
        n_angles,
    )


@dataclass
class Optimum:
    target: str
    family: str
    n_L: UnitVec3
    n_P: UnitVec3
    value: float
    constraint: str
    grid_deg: float
    grid_value: float = float("nan")
    angles: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target == "relative_contrast" and not 0.0 <= self.value <= 1.0 + 1e-12:
            raise ValueError(f"relative contrast {self.value} outside [0, 1]")
        if self.target == "chi" and not self.value > 0:
            raise ValueError(f"chi must be positive, got {self.value}")

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "family": self.family,
            "value": self.value,
            "n_L": self.n_L.tolist(),
            "n_P": self.n_P.tolist(),
            "constraint": self.constraint,
            "grid_deg": self.grid_deg,
        }


def hemisphere_grid(grid_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Equiangular grid over the upper hemisphere.

    Returns ``(angles, vectors)`` with ``angles[:, 0]`` the polar angle in
    [0, 90] deg and ``angles[:, 1]`` the azimuth in [0, 360) deg, both in
    radians, sorted lexicographically. The pole appears once. Grids whose
    steps divide each other are nested.
    """
    step = math.radians(grid_deg)
    n_polar = int(math.floor(90.0 / grid_deg + 1e-9)) + 1
    n_azim = int(math.ceil(360.0 / grid_deg - 1e-9))
    polar = np.arange(n_polar) * step
    azim = np.arange(n_azim) * step
    T, F = np.meshgrid(polar[1:], azim, indexing="ij")
    angles = np.concatenate([[[0.0, 0.0]], np.stack([T.ravel(), F.ravel()], axis=1)])
    return angles, spherical_to_vector(angles[:, 0], angles[:, 1])


def spherical_to_vector(polar, azimuth) -> np.ndarray:
    polar = np.asarray(polar, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    s = np.sin(polar)
    return np.stack([s * np.cos(azimuth), s * np.sin(azimuth), np.cos(polar)], axis=-1)


def figure_of_merit(axes: np.ndarray, family_index: int, target: str, n_L, n_P) -> float:
    """R or chi of one family; ``-inf`` for an extinguished setting."""
    p = excitation_array(axes, n_L)
    i = excitation_array(axes, n_P)
    prod = p * i
    total = prod.sum()
    if total <= 0.0:
        return -math.inf
    if target == "relative_contrast":
        return float(prod[family_index] / total)
    return float(prod[family_index] / math.sqrt(total))


def _coordinate_ascent(f, x0, step, min_step=_MIN_REFINE_STEP):
    """Maximize ``f`` by coordinate moves of +-step, halving step on stall."""
    x = np.array(x0, dtype=float)
    best = f(x)
    while step >= min_step:
        improved = False
        for k in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[k] += sign * step
                val = f(trial)
                if val > best:
                    x, best, improved = trial, val, True
                    break
        if not improved:
            step /= 2.0
    return x, best


def optimize(
    families=None,
    target: str = "relative_contrast",
    family: str = "A",
    constraint: str = "unconstrained",
    grid_deg: float = 1.0,
    refine: bool = True,
    laser: PolarizationPlane | None = None,
    collection: PolarizationPlane | None = None,
    threads: int = 1,
    backend: str | None = None,
) -> Optimum:
    """Maximize ``R`` or ``chi`` of one family over the laser and polarizer directions.

    ``unconstrained`` searches both vectors over the whole sphere;
    ``planes_of_experiment`` keeps ``n_L`` in the laser plane and ``n_P``
    in the collection plane. A grid search (pairwise, via the compiled
    kernel) is followed by coordinate-ascent refinement when ``refine``.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}; expected one of {CONSTRAINTS}")
    if not 0 < grid_deg <= 2.0:
        raise ValueError(f"grid_deg must lie in (0, 2], got {grid_deg}")
    families = list(families or canonical_families())
    labels = [f.label for f in families]
    if family not in labels:
        raise ValueError(f"unknown family {family!r}")
    k = labels.index(family)
    axes = family_axes(families)

    if constraint == "unconstrained":
        angles, vecs = hemisphere_grid(grid_deg)
        X = Y = excitation_array(axes, vecs)
        names = ("polar_L", "azimuth_L", "polar_P", "azimuth_P")

        def vectors_of(t):
            return spherical_to_vector(t[0], t[1]), spherical_to_vector(t[2], t[3])

    else:
        laser = laser or laser_plane()
        collection = collection or collection_plane()
        angles = sweep_angles(int(round(180.0 / grid_deg)))[:, None]
        X = excitation_array(axes, laser.vectors(angles[:, 0]))
        Y = excitation_array(axes, collection.vectors(angles[:, 0]))
        names = ("laser", "polarizer")

        def vectors_of(t):
            return laser.vectors(t[0]), collection.vectors(t[1])

    grid_value, i, j = kernels.grid_argmax(X, Y, k, target, threads=threads, backend=backend)
    theta = np.concatenate([angles[i], angles[j]])
    value = grid_value
    if refine:
        refined, refined_value = _coordinate_ascent(
            lambda t: figure_of_merit(axes, k, target, *vectors_of(t)), theta, math.radians(grid_deg)
        )
        if refined_value > grid_value:
            theta, value = refined, refined_value
    n_L, n_P = vectors_of(theta)
    return Optimum(
        target=target,
        family=family,
        n_L=UnitVec3.of(n_L),
        n_P=UnitVec3.of(n_P),
        value=float(value),
        constraint=constraint,
        grid_deg=grid_deg,
        grid_value=grid_value,
        angles={name: math.degrees(a) for name, a in zip(names, theta)},
    )


def baseline_weights(params: PhotophysicsParams | None = None, families=None) -> FamilyWeights:
    """Equal-contribution configuration: laser and polarizer along <100>."""
    return family_weights(
        params or PhotophysicsParams(), families or canonical_families(), BASELINE_LASER, BASELINE_POLARIZER
    )


def improvement_report(optimum: Optimum, baseline: FamilyWeights) -> dict:
    """Ratio of the optimum to the baseline value of the same metric and family."""
    name = "relative_contribution" if optimum.target == "relative_contrast" else "chi"
    base = baseline.by_label(name)[optimum.family]
    return {
        "target": optimum.target,
        "family": optimum.family,
        "optimum": optimum.value,
        "baseline": base,
        "ratio": optimum.value / base,
    }


def optimum_json(optimum: Optimum, report: dict | None = None) -> str:
    payload = optimum.to_dict()
    if report is not None:
        payload["baseline"] = report["baseline"]
        payload["improvement"] = report["ratio"]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
