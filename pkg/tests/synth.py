"""Random non-degenerate spectrum configurations shared by the round-trip tests."""
from __future__ import annotations

import itertools
import math

import numpy as np

from nvpolar.geometry import BASELINE_LASER, canonical_families, collection_plane
from nvpolar.photophysics import PhotophysicsParams, family_weights
from nvpolar.zeeman import MagneticField, build_spectrum_model, default_grid, min_peak_separation, predicted_splittings

FAMILIES = canonical_families()
LINEWIDTH = 10e6


def random_direction(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_field(rng, min_separation: float, min_splitting_gap: float = 0.0) -> MagneticField:
    """|B| uniform in [1, 5] mT, isotropic direction, resampled until resolvable."""
    while True:
        field = MagneticField.from_direction(rng.uniform(1e-3, 5e-3), random_direction(rng))
        if min_peak_separation(field, FAMILIES) < min_separation:
            continue
        s = predicted_splittings(field, FAMILIES)
        gap = min(abs(a - b) for a, b in itertools.combinations(s, 2))
        if gap > min_splitting_gap:
            return field


def random_configuration(rng, n_points: int = 2000):
    """Field, generating model and grid with a random polarizer angle.

    With the laser along [010] and the polarizer in the (001) plane every
    family keeps R between 1/8 and 3/8, so all eight dips are visible.
    """
    field = random_field(rng, 2.0 * LINEWIDTH)
    n_p = collection_plane().vectors(rng.uniform(0.0, math.pi))
    weights = family_weights(PhotophysicsParams(), FAMILIES, BASELINE_LASER, n_p)
    model = build_spectrum_model(field, FAMILIES, weights, LINEWIDTH)
    return field, model, default_grid(field, LINEWIDTH, n_points)
