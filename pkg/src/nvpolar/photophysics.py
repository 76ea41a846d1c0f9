"""Polarization-dependent excitation and emission of an NV ensemble.

Each family is excited with probability ``1 - (axis . n_L)^2`` and emits a
PL component polarized along ``n_P`` with intensity ``1 - (axis . n_P)^2``
(both normalized to [0, 1]). From these per-family products follow the
detected PL ``S0``, the ODMR contrasts ``C_i``, the relative contributions
``R_i`` and the sensitivity figures ``chi_i`` and ``rho_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import FAMILY_LABELS, NVFamily, _as_array, family_axes


class DegenerateConfigurationError(ValueError):
    """All four families are extinguished, so ratios are undefined."""


@dataclass(frozen=True)
class PhotophysicsParams:
    """Absolute scales of the ensemble PL.

    ``pl_off`` and ``pl_on`` are the per-NV emission rates out of and on
    resonance. The defaults give ``alpha * N * pl_off / 4 = 1`` and a 15 %
    intrinsic contrast.
    """

    pl_off: float = 1.0
    pl_on: float = 0.85
    collection_efficiency: float = 1.0
    ensemble_size: float = 4.0

    def __post_init__(self):
        if not 0 < self.pl_on < self.pl_off:
            raise ValueError(f"need 0 < pl_on < pl_off, got pl_on={self.pl_on}, pl_off={self.pl_off}")
        if not 0 < self.collection_efficiency <= 1:
            raise ValueError(f"collection_efficiency must lie in (0, 1], got {self.collection_efficiency}")
        if self.ensemble_size <= 0:
            raise ValueError(f"ensemble_size must be positive, got {self.ensemble_size}")

    @property
    def pl_scale(self) -> float:
        """``alpha * N * PL_off / 4``."""
        return self.collection_efficiency * self.ensemble_size * self.pl_off / 4.0

    @property
    def intrinsic_contrast(self) -> float:
        return (self.pl_off - self.pl_on) / self.pl_off


@dataclass(frozen=True)
class FamilyWeights:
    """Per-family figures for one (laser, polarizer) setting, in label order."""

    excitation: np.ndarray
    emission: np.ndarray
    relative_contribution: np.ndarray
    contrast: np.ndarray
    chi: np.ndarray
    rho: np.ndarray
    s0: float
    labels: tuple = field(default=FAMILY_LABELS)

    def by_label(self, name: str) -> dict[str, float]:
        values = getattr(self, name)
        return {label: float(v) for label, v in zip(self.labels, values)}


def _direction(v) -> np.ndarray:
    """Unit vector(s) along the last axis of ``v``."""
    a = _as_array(v)
    norm = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise ValueError("direction vectors must be finite and non-zero")
    return a / norm


def excitation_probability(family_axis, laser_polarization) -> float:
    """Excitation probability ``1 - (axis . n_L)^2``."""
    d = np.dot(_direction(family_axis), _direction(laser_polarization))
    return float(1.0 - d * d)


def polarized_emission_intensity(family_axis, polarizer_axis) -> float:
    """PL intensity transmitted by a polarizer along ``n_P``: ``1 - (axis . n_P)^2``.

    Assumes ``n_P`` is perpendicular to the collection axis; this is not
    checked here.
    """
    d = np.dot(_direction(family_axis), _direction(polarizer_axis))
    return float(1.0 - d * d)


def dipole_far_field(dipole_dir, observation_dir) -> np.ndarray:
    """Far-field electric field direction ``(u x d) x u`` of a dipole ``d`` seen along ``u``."""
    u = _direction(observation_dir)
    d = _direction(dipole_dir)
    return np.cross(np.cross(u, d), u)


def dipole_far_field_intensity(dipole_dir, observation_dir) -> float:
    """Intensity ``|(u x d) x u|^2`` radiated by a dipole along ``u``."""
    e = dipole_far_field(dipole_dir, observation_dir)
    return float(np.dot(e, e))


def dipole_sum_emission(family: NVFamily, observation_dir, polarizer_axis) -> float:
    """Polarized emission of a family from its two incoherent dipoles.

    Sums ``|((u x d_k) x u) . n_P|^2`` over both dipoles. For ``n_P``
    perpendicular to ``u`` this equals :func:`polarized_emission_intensity`.
    """
    n_p = _direction(polarizer_axis)
    total = 0.0
    for d in (family.dipole1, family.dipole2):
        total += float(np.dot(dipole_far_field(d, observation_dir), n_p)) ** 2
    return total


def excitation_array(axes: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """``1 - (axis_j . n)^2`` for every direction and family, shape ``(..., 4)``.

    Emission uses the same expression, so this also serves for ``I_j(n_P)``.
    """
    d = _direction(directions) @ np.asarray(axes, dtype=float).T
    return 1.0 - d * d


def detected_pl(params: PhotophysicsParams, families, n_L, n_P) -> float:
    """Detected off-resonance PL, ``alpha N PL_off / 4 * sum_j P_j I_j``."""
    axes = family_axes(families)
    p = excitation_array(axes, n_L)
    i = excitation_array(axes, n_P)
    return float(params.pl_scale * np.sum(p * i))


def family_weights(params: PhotophysicsParams, families, n_L, n_P) -> FamilyWeights:
    """Every per-family figure of merit at one (laser, polarizer) setting."""
    families = list(families)
    axes = family_axes(families)
    p = excitation_array(axes, n_L)
    i = excitation_array(axes, n_P)
    prod = p * i
    total = prod.sum()
    if total <= 0.0:
        raise DegenerateConfigurationError("sum_j P_j I_j = 0: every family is extinguished")
    contrast = prod * (params.pl_off - params.pl_on) / (total * params.pl_off)
    s0 = params.pl_scale * total
    return FamilyWeights(
        excitation=p,
        emission=i,
        relative_contribution=prod / total,
        contrast=contrast,
        chi=prod / np.sqrt(total),
        rho=contrast * np.sqrt(s0),
        s0=float(s0),
        labels=tuple(f.label for f in families),
    )


def weights_table(params: PhotophysicsParams, axes: np.ndarray, n_L: np.ndarray, n_P: np.ndarray) -> dict:
    """Vectorized :func:`family_weights` over stacks of directions.

    ``n_L`` and ``n_P`` broadcast against each other with a trailing axis of 3.
    Entries where every family is extinguished come out as NaN.
    """
    p = excitation_array(axes, n_L)
    i = excitation_array(axes, n_P)
    prod = p * i
    total = prod.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        safe = np.where(total > 0, total, np.nan)
        r = prod / safe
        contrast = r * params.intrinsic_contrast
        s0 = params.pl_scale * total[..., 0]
        return {
            "excitation": p,
            "emission": i,
            "relative_contribution": r,
            "contrast": contrast,
            "chi": prod / np.sqrt(safe),
            "rho": contrast * np.sqrt(s0)[..., None],
            "s0": s0,
        }

