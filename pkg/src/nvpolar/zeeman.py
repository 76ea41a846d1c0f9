"""Zeeman-split resonances and synthetic eight-peak ODMR spectra."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import _as_array, family_axes
from .photophysics import FamilyWeights

LOW_FIELD_LIMIT_T = 0.01


class OverlapWarning(UserWarning):
    """Two resonances are closer than one linewidth."""


@dataclass(frozen=True)
class NVConstants:
    zero_field_splitting_d: float = 2.87e9  # Hz
    gyromagnetic_ratio_gamma: float = 28e9  # Hz/T

    def __post_init__(self):
        if self.zero_field_splitting_d <= 0 or self.gyromagnetic_ratio_gamma <= 0:
            raise ValueError("D and gamma must be positive")


@dataclass(frozen=True)
class MagneticField:
    """Static field in tesla, crystal frame. Restricted to the low-field regime."""

    vector: tuple

    def __post_init__(self):
        v = tuple(float(c) for c in self.vector)
        if len(v) != 3 or not all(math.isfinite(c) for c in v):
            raise ValueError(f"field must be a finite 3-vector, got {self.vector!r}")
        if math.hypot(*v) >= LOW_FIELD_LIMIT_T:
            raise ValueError(f"|B| = {math.hypot(*v)} T is outside the low-field regime (< {LOW_FIELD_LIMIT_T} T)")
        object.__setattr__(self, "vector", v)

    @classmethod
    def from_direction(cls, magnitude_t: float, direction) -> "MagneticField":
        d = _as_array(direction)
        return cls(tuple(magnitude_t * d / np.linalg.norm(d)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vector)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.array))


# Generic default: four distinct projections, neighbouring resonances > 28 MHz apart.
DEFAULT_FIELD = MagneticField.from_direction(4e-3, (1.0, 2.0, 4.0))
DEFAULT_LINEWIDTH_HZ = 10e6


@dataclass(frozen=True)
class LorentzianPeak:
    center_nu: float
    fwhm_a: float
    contrast_c: float

    def __post_init__(self):
        if not self.fwhm_a > 0:
            raise ValueError(f"fwhm must be positive, got {self.fwhm_a}")
        if not 0 <= self.contrast_c < 1:
            raise ValueError(f"contrast must lie in [0, 1), got {self.contrast_c}")


@dataclass(frozen=True)
class SpectrumModel:
    """Eight Lorentzian dips sorted by frequency, optionally mapped to families."""

    peaks: tuple
    family_of_peak: tuple | None = None

    def __post_init__(self):
        peaks = tuple(self.peaks)
        object.__setattr__(self, "peaks", peaks)
        centers = [p.center_nu for p in peaks]
        if any(b < a for a, b in zip(centers, centers[1:])):
            raise ValueError("peaks must be sorted by center frequency")
        if self.family_of_peak is not None:
            fam = tuple(self.family_of_peak)
            if len(fam) != len(peaks):
                raise ValueError("family map length differs from peak count")
            for label in set(fam):
                if fam.count(label) != 2:
                    raise ValueError(f"family {label} must own exactly two peaks")
            object.__setattr__(self, "family_of_peak", fam)

    @property
    def centers(self) -> np.ndarray:
        return np.array([p.center_nu for p in self.peaks])

    @property
    def fwhms(self) -> np.ndarray:
        return np.array([p.fwhm_a for p in self.peaks])

    @property
    def contrasts(self) -> np.ndarray:
        return np.array([p.contrast_c for p in self.peaks])

    def params(self) -> np.ndarray:
        """Flat parameter vector ``[nu_1, a_1, c_1, nu_2, ...]``."""
        return np.column_stack([self.centers, self.fwhms, self.contrasts]).ravel()

    @classmethod
    def from_params(cls, params, family_of_peak=None) -> "SpectrumModel":
        triples = np.asarray(params, dtype=float).reshape(-1, 3)
        order = np.argsort(triples[:, 0], kind="stable")
        peaks = tuple(LorentzianPeak(float(n), float(a), float(c)) for n, a, c in triples[order])
        if family_of_peak is not None:
            family_of_peak = tuple(family_of_peak[k] for k in order)
        return cls(peaks, family_of_peak)

    def with_families(self, family_of_peak) -> "SpectrumModel":
        return SpectrumModel(self.peaks, tuple(family_of_peak))

    def evaluate(self, frequencies) -> np.ndarray:
        return lorentzian_dips(frequencies, self.centers, self.fwhms, self.contrasts)


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    normalized_pl: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        y = np.asarray(self.normalized_pl, dtype=float)
        if f.shape != y.shape or f.ndim != 1:
            raise ValueError("frequencies and samples must be 1-D arrays of equal length")
        if len(f) > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "normalized_pl", y)

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["frequency_hz", "normalized_pl"])
        for f, y in zip(self.frequencies, self.normalized_pl):
            w.writerow([repr(float(f)), repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Spectrum":
        """Parse the two-column ``frequency_hz,normalized_pl`` format."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty spectrum file")
        header = [h.strip() for h in rows[0]]
        if header != ["frequency_hz", "normalized_pl"]:
            raise ValueError(f"expected header frequency_hz,normalized_pl, got {','.join(rows[0])}")
        data = [r for r in rows[1:] if r]
        if not data:
            raise ValueError("spectrum file has no samples")
        try:
            arr = np.array([[float(a), float(b)] for a, b in data])
        except ValueError as exc:
            raise ValueError(f"malformed spectrum row: {exc}") from None
        return cls(arr[:, 0], arr[:, 1])


def resonance_frequencies(field: MagneticField, family_axis, constants: NVConstants = NVConstants()):
    """First-order resonances ``(nu_minus, nu_plus) = |D -+ gamma |B_NV||``.

    The sign of the projection is dropped: an NV family is invariant under
    axis reversal, so only ``|B . axis|`` is physical.
    """
    axis = _as_array(family_axis)
    b_nv = abs(float(np.dot(field.array, axis / np.linalg.norm(axis))))
    shift = constants.gyromagnetic_ratio_gamma * b_nv
    d = constants.zero_field_splitting_d
    return abs(d - shift), abs(d + shift)


def lorentzian_dips(frequencies, centers, fwhms, contrasts) -> np.ndarray:
    """``1 - sum_i c_i (a_i/2)^2 / ((a_i/2)^2 + (nu - nu_i)^2)``."""
    nu = np.asarray(frequencies, dtype=float)[:, None]
    half2 = (np.asarray(fwhms, dtype=float) / 2.0) ** 2
    lor = half2 / (half2 + (nu - np.asarray(centers, dtype=float)) ** 2)
    return 1.0 - lor @ np.asarray(contrasts, dtype=float)


def build_spectrum_model(field: MagneticField, families, weights: FamilyWeights, linewidth: float = DEFAULT_LINEWIDTH_HZ,
                         constants: NVConstants = NVConstants()) -> SpectrumModel:
    """Two dips per family at its Zeeman resonances, each with the family contrast."""
    families = list(families)
    contrast = weights.by_label("contrast")
    triples, labels = [], []
    for fam in families:
        for nu in resonance_frequencies(field, fam.axis, constants):
            triples.append((nu, linewidth, contrast[fam.label]))
            labels.append(fam.label)
    model = SpectrumModel.from_params(np.array(triples).ravel(), labels)
    gap = np.diff(model.centers).min()
    if gap < linewidth:
        warnings.warn(
            f"resonances separated by {gap / 1e6:.3f} MHz, less than the {linewidth / 1e6:.3f} MHz linewidth",
            OverlapWarning,
            stacklevel=2,
        )
    return model


def min_peak_separation(field: MagneticField, families, constants: NVConstants = NVConstants()) -> float:
    """Smallest gap between any two of the eight resonances, in Hz."""
    nus = sorted(nu for fam in families for nu in resonance_frequencies(field, fam.axis, constants))
    return float(np.diff(nus).min())


def predicted_splittings(field: MagneticField, families, constants: NVConstants = NVConstants()) -> np.ndarray:
    """``2 gamma |B . axis_j|`` per family, label order."""
    return 2.0 * constants.gyromagnetic_ratio_gamma * np.abs(family_axes(families) @ field.array)


def default_grid(field: MagneticField, linewidth: float = DEFAULT_LINEWIDTH_HZ, n_points: int = 2000,
                 constants: NVConstants = NVConstants()) -> np.ndarray:
    """Frequency grid centered on D covering all resonances plus ten linewidths."""
    half = constants.gyromagnetic_ratio_gamma * field.magnitude + 10.0 * linewidth
    d = constants.zero_field_splitting_d
    return np.linspace(d - half, d + half, n_points)


def synthesize_spectrum(model: SpectrumModel, grid, noise_sigma: float = 0.0, seed: int = 0) -> Spectrum:
    """Sample the model on ``grid`` and add i.i.d. Gaussian noise."""
    grid = np.asarray(grid, dtype=float)
    clean = model.evaluate(grid)
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        clean = clean + rng.normal(0.0, noise_sigma, size=grid.shape)
    return Spectrum(grid, clean)


def family_contrast(model: SpectrumModel) -> dict[str, float]:
    """Family contrast as the mean of its two transition contrasts."""
    if model.family_of_peak is None:
        raise ValueError("model has no family assignment")
    out: dict[str, list[float]] = {}
    for label, peak in zip(model.family_of_peak, model.peaks):
        out.setdefault(label, []).append(peak.contrast_c)
    return {label: (c[0] + c[1]) / 2.0 for label, c in sorted(out.items())}
