import json

import pytest

from nvpolar.config import ConfigError, RunConfig, load_config, parse_config


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg == RunConfig()
    assert cfg.optimize.grid_deg == 1.0


def test_full_document(tmp_path):
    doc = {
        "field": [0.001, 0.002, 0.003],
        "constants": {"zero_field_splitting_hz": 2.88e9},
        "photophysics": {"pl_on": 0.7},
        "linewidth_hz": 5e6,
        "noise_sigma": 0.001,
        "seed": 4,
        "laser_polarization": [1, 0, 0],
        "spectrum": {"n_points": 1000, "f_min_hz": 2.7e9},
        "sweep": {"n_angles": 360},
        "optimize": {"grid_deg": 0.5, "refine": False},
        "output_dir": "out",
        "threads": 2,
    }
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    cfg = load_config(path)
    assert cfg.constants.zero_field_splitting_d == 2.88e9
    assert cfg.photophysics.pl_on == 0.7
    assert cfg.field.vector == (0.001, 0.002, 0.003)
    assert cfg.spectrum.n_points == 1000 and cfg.spectrum.f_max_hz is None
    assert cfg.sweep.n_angles == 360
    assert cfg.optimize == type(cfg.optimize)(0.5, False)
    assert cfg.threads == 2 and cfg.seed == 4


@pytest.mark.parametrize(
    "doc, key",
    [
        ({}, "field"),
        ({"field": [0, 0, 0], "bogus": 1}, "bogus"),
        ({"field": [0, 0]}, "field"),
        ({"field": [0, 0, 0.5]}, "field"),
        ({"field": [0, 0, 0], "linewidth_hz": -1}, "linewidth_hz"),
        ({"field": [0, 0, 0], "noise_sigma": "x"}, "noise_sigma"),
        ({"field": [0, 0, 0], "seed": 1.5}, "seed"),
        ({"field": [0, 0, 0], "photophysics": {"pl_on": 2.0}}, "photophysics"),
        ({"field": [0, 0, 0], "photophysics": {"gain": 2.0}}, "photophysics.gain"),
        ({"field": [0, 0, 0], "optimize": {"grid_deg": 5}}, "optimize.grid_deg"),
        ({"field": [0, 0, 0], "optimize": {"refine": 1}}, "optimize.refine"),
        ({"field": [0, 0, 0], "laser_polarization": [0, 0, 0]}, "laser_polarization"),
        ({"field": [0, 0, 0], "threads": 0}, "threads"),
        ({"field": [0, 0, 0], "spectrum": []}, "spectrum"),
        ([], "config"),
    ],
)
def test_errors_name_the_key(doc, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert str(exc.value).startswith(key)


def test_unreadable_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
