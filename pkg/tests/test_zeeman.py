import math
import warnings

import numpy as np
import pytest

from nvpolar.geometry import BASELINE_LASER, BASELINE_POLARIZER, canonical_families
from nvpolar.photophysics import PhotophysicsParams, family_weights
from nvpolar.zeeman import (
    DEFAULT_FIELD,
    LorentzianPeak,
    MagneticField,
    NVConstants,
    OverlapWarning,
    Spectrum,
    SpectrumModel,
    build_spectrum_model,
    default_grid,
    family_contrast,
    lorentzian_dips,
    min_peak_separation,
    predicted_splittings,
    resonance_frequencies,
    synthesize_spectrum,
)

FAMILIES = canonical_families()
WEIGHTS = family_weights(PhotophysicsParams(), FAMILIES, BASELINE_LASER, BASELINE_POLARIZER)


def test_resonances_symmetric_about_d():
    field = MagneticField((0.0, 0.0, 3e-3))
    lo, hi = resonance_frequencies(field, (1, 1, 1))
    shift = 28e9 * 3e-3 / math.sqrt(3)
    assert lo == pytest.approx(2.87e9 - shift, rel=1e-15)
    assert hi == pytest.approx(2.87e9 + shift, rel=1e-15)
    # axis reversal leaves the pair unchanged
    assert resonance_frequencies(field, (-1, -1, -1)) == pytest.approx((lo, hi), rel=1e-15)


def test_field_limits():
    with pytest.raises(ValueError, match="low-field"):
        MagneticField((0.0, 0.0, 0.02))
    with pytest.raises(ValueError):
        MagneticField((0.0, float("nan"), 0.0))
    assert MagneticField.from_direction(2e-3, (0, 3, 4)).magnitude == pytest.approx(2e-3)


def test_constants_validated():
    with pytest.raises(ValueError):
        NVConstants(zero_field_splitting_d=-1.0)


def test_default_field_resolves_all_peaks():
    assert min_peak_separation(DEFAULT_FIELD, FAMILIES) > 2 * 10e6
    s = predicted_splittings(DEFAULT_FIELD, FAMILIES)
    assert len(set(np.round(s))) == 4


def test_lorentzian_half_depth_at_half_width():
    y = lorentzian_dips([2.87e9, 2.87e9 + 5e6], [2.87e9], [10e6], [0.1])
    assert y == pytest.approx([0.9, 0.95])


def test_build_model_peaks_and_families():
    model = build_spectrum_model(DEFAULT_FIELD, FAMILIES, WEIGHTS)
    assert len(model.peaks) == 8
    assert np.all(np.diff(model.centers) > 0)
    assert sorted(model.family_of_peak) == sorted("AABBCCDD")
    # outermost pair belongs to the family with largest |B . axis|
    axes = np.array([f.axis.array for f in FAMILIES])
    biggest = "ABCD"[int(np.argmax(np.abs(axes @ DEFAULT_FIELD.array)))]
    assert model.family_of_peak[0] == model.family_of_peak[-1] == biggest
    assert family_contrast(model) == pytest.approx({k: 0.0375 for k in "ABCD"})


def test_overlap_warning_for_axial_field():
    with pytest.warns(OverlapWarning):
        build_spectrum_model(MagneticField((0, 0, 2e-3)), FAMILIES, WEIGHTS)


def test_model_validation():
    p = LorentzianPeak(2.8e9, 1e6, 0.1)
    q = LorentzianPeak(2.9e9, 1e6, 0.1)
    with pytest.raises(ValueError, match="sorted"):
        SpectrumModel((q, p))
    with pytest.raises(ValueError, match="two peaks"):
        SpectrumModel((p, q), ("A", "B"))
    with pytest.raises(ValueError):
        LorentzianPeak(2.8e9, -1.0, 0.1)
    with pytest.raises(ValueError):
        LorentzianPeak(2.8e9, 1.0, 1.0)
    m = SpectrumModel.from_params([2.9e9, 1e6, 0.2, 2.8e9, 2e6, 0.1], ("A", "A"))
    assert m.centers.tolist() == [2.8e9, 2.9e9]
    assert m.params().tolist() == [2.8e9, 2e6, 0.1, 2.9e9, 1e6, 0.2]


def test_synthesis_is_reproducible():
    model = build_spectrum_model(DEFAULT_FIELD, FAMILIES, WEIGHTS)
    grid = default_grid(DEFAULT_FIELD)
    a = synthesize_spectrum(model, grid, 0.002, seed=5)
    b = synthesize_spectrum(model, grid, 0.002, seed=5)
    c = synthesize_spectrum(model, grid, 0.002, seed=6)
    assert np.array_equal(a.normalized_pl, b.normalized_pl)
    assert not np.array_equal(a.normalized_pl, c.normalized_pl)
    clean = synthesize_spectrum(model, grid)
    assert np.std(a.normalized_pl - clean.normalized_pl) == pytest.approx(0.002, rel=0.1)
    assert grid[0] < model.centers[0] - 5 * 10e6 and grid[-1] > model.centers[-1] + 5 * 10e6


def test_csv_round_trip_is_exact():
    s = Spectrum(np.array([2.8e9, 2.81e9, 2.82e9]), np.array([1.0, 0.123456789012345678, 0.99]))
    text = s.to_csv()
    assert text.splitlines()[0] == "frequency_hz,normalized_pl"
    back = Spectrum.from_csv(text)
    assert np.array_equal(back.frequencies, s.frequencies)
    assert np.array_equal(back.normalized_pl, s.normalized_pl)


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("freq,pl\n1,2\n", "header"),
        ("frequency_hz,normalized_pl\n", "no samples"),
        ("frequency_hz,normalized_pl\n1,abc\n", "malformed"),
        ("frequency_hz,normalized_pl\n2,1\n1,1\n", "increasing"),
    ],
)
def test_csv_rejects_bad_input(text, match):
    with pytest.raises(ValueError, match=match):
        Spectrum.from_csv(text)


def test_synthesis_rejects_negative_noise():
    model = build_spectrum_model(DEFAULT_FIELD, FAMILIES, WEIGHTS)
    with pytest.raises(ValueError):
        synthesize_spectrum(model, default_grid(DEFAULT_FIELD), -1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        synthesize_spectrum(model, default_grid(DEFAULT_FIELD), 0.0)
