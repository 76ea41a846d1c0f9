"""Matching fitted ODMR peaks to NV families."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .zeeman import MagneticField, NVConstants, SpectrumModel, predicted_splittings

# Floor on the splitting resolution when the fit reports (near) zero uncertainty.
MIN_RESOLUTION_HZ = 1e3

SUPPRESSION_THRESHOLD = 0.01


class AssignmentError(ValueError):
    pass


class AmbiguousAssignment(AssignmentError):
    pass


def pair_peaks(model: SpectrumModel, constants: NVConstants = NVConstants(), tolerance: float | None = None):
    """Group the sorted peaks into (lower, upper) index pairs symmetric about D.

    Pairs come back outermost first. ``tolerance`` bounds the distance of
    each pair midpoint from D and defaults to the median peak width.
    """
    n = len(model.peaks)
    if n % 2:
        raise AssignmentError(f"need an even number of peaks, got {n}")
    centers = model.centers
    if tolerance is None:
        tolerance = float(np.median(model.fwhms))
    pairs = []
    for k in range(n // 2):
        lo, hi = k, n - 1 - k
        mid = 0.5 * (centers[lo] + centers[hi])
        if abs(mid - constants.zero_field_splitting_d) > tolerance:
            raise AssignmentError(
                f"peaks {lo} and {hi} have midpoint {mid:.6g} Hz, "
                f"more than {tolerance:.3g} Hz from D"
            )
        pairs.append((lo, hi))
    return pairs


def assign_peaks_to_families(
    fitted: SpectrumModel,
    field: MagneticField,
    families,
    constants: NVConstants = NVConstants(),
    splitting_ci95=None,
) -> SpectrumModel:
    """Attach a family label to every fitted peak.

    Peaks are paired around D, then pair splittings are matched to the
    predicted ``2 gamma |B . axis|`` by minimum total absolute deviation over
    all permutations (ties go to the permutation earliest in label order).

    ``splitting_ci95`` is the 95 % half-width on each measured splitting
    (scalar or one per pair, outermost first). Raises
    :class:`AmbiguousAssignment` when two predicted splittings are closer
    than that resolution.
    """
    families = list(families)
    labels = [f.label for f in families]
    pairs = pair_peaks(fitted, constants)
    if len(pairs) != len(families):
        raise AssignmentError(f"{len(pairs)} peak pairs for {len(families)} families")
    centers = fitted.centers
    measured = np.array([centers[hi] - centers[lo] for lo, hi in pairs])
    predicted = predicted_splittings(field, families, constants)

    if splitting_ci95 is None:
        resolution = 0.0
    else:
        resolution = float(np.max(np.atleast_1d(splitting_ci95)))
    resolution = max(resolution, MIN_RESOLUTION_HZ)
    for a, b in itertools.combinations(range(len(families)), 2):
        if abs(predicted[a] - predicted[b]) < resolution:
            raise AmbiguousAssignment(
                f"families {labels[a]} and {labels[b]} have predicted splittings "
                f"{predicted[a]:.6g} Hz and {predicted[b]:.6g} Hz, closer than {resolution:.3g} Hz"
            )

    best_cost, best_perm = math.inf, None
    # perm[f] = index of the pair assigned to family f
    for perm in itertools.permutations(range(len(pairs))):
        cost = sum(abs(measured[perm[f]] - predicted[f]) for f in range(len(families)))
        if cost < best_cost:
            best_cost, best_perm = cost, perm
    family_of_peak = [None] * len(fitted.peaks)
    for f, p in enumerate(best_perm):
        lo, hi = pairs[p]
        family_of_peak[lo] = labels[f]
        family_of_peak[hi] = labels[f]
    return fitted.with_families(family_of_peak)


def splitting_ci_from_fit(fit, constants: NVConstants = NVConstants()) -> list[float]:
    """Per-pair 95 % half-widths of the measured splittings, outermost first."""
    return [fit.splitting_ci95(lo, hi) for lo, hi in pair_peaks(fit.model, constants)]


def identify_family_by_suppression(sweep, threshold: float = SUPPRESSION_THRESHOLD) -> dict[str, float]:
    """Angles (rad) at which a family's relative contribution vanishes.

    Only families whose ``R`` drops below ``threshold`` somewhere in the
    sweep are reported; each maps to the angle of its minimum.
    """
    out = {}
    r = sweep.relative_contribution
    for k, label in enumerate(sweep.labels):
        col = r[:, k]
        if np.all(np.isnan(col)):
            continue
        idx = int(np.nanargmin(col))
        if col[idx] < threshold:
            out[label] = float(sweep.angles[idx])
    return out
