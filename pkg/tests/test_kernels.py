import os
import subprocess
import sys

import numpy as np
import pytest

from nvpolar import kernels
from nvpolar.geometry import family_axes
from nvpolar.optimizer import hemisphere_grid
from nvpolar.photophysics import excitation_array

needs_compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels not built")


def reference_argmax(X, Y, k, target):
    """Dense brute force with first-occurrence tie breaking."""
    s = X @ Y.T
    p = np.outer(X[:, k], Y[:, k])
    with np.errstate(invalid="ignore", divide="ignore"):
        v = p / s if target == "relative_contrast" else p / np.sqrt(s)
    v = np.where(s > 0, v, -np.inf)
    flat = int(np.argmax(v))
    return float(v.flat[flat]), flat // v.shape[1], flat % v.shape[1]


def grid_tables(deg):
    _, vecs = hemisphere_grid(deg)
    X = excitation_array(family_axes(), vecs)
    return X, X


@pytest.mark.parametrize("backend", ["python", pytest.param("compiled", marks=needs_compiled)])
@pytest.mark.parametrize("target", ["relative_contrast", "chi"])
def test_matches_dense_reference(backend, target):
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, size=(300, 4))
    Y = rng.uniform(0, 1, size=(257, 4))
    for k in range(4):
        value, i, j = kernels.grid_argmax(X, Y, k, target, backend=backend)
        ref = reference_argmax(X, Y, k, target)
        assert value == pytest.approx(ref[0], rel=1e-14)
        assert (i, j) == ref[1:]


@needs_compiled
@pytest.mark.parametrize("target", ["relative_contrast", "chi"])
def test_backends_bit_identical_on_sphere_grid(target):
    X, Y = grid_tables(4.0)
    for k in range(4):
        a = kernels.grid_argmax(X, Y, k, target, backend="compiled")
        b = kernels.grid_argmax(X, Y, k, target, backend="python")
        assert a == b


def test_ties_go_to_first_pair():
    X = np.ones((700, 4))
    value, i, j = kernels.grid_argmax(X, X, 2, "relative_contrast")
    assert (value, i, j) == (0.25, 0, 0)


def test_zero_rows_are_skipped():
    X = np.zeros((5, 4))
    assert kernels.grid_argmax(X, X, 0, "chi") == (-1.0, -1, -1)
    X[3, 1] = 1.0
    value, i, j = kernels.grid_argmax(X, X, 1, "chi")
    assert (value, i, j) == (1.0, 3, 3)


def test_thread_count_does_not_change_result():
    X, Y = grid_tables(3.0)
    single = kernels.grid_argmax(X, Y, 0, "chi", threads=1)
    for threads in (2, 3, 8):
        assert kernels.grid_argmax(X, Y, 0, "chi", threads=threads) == single


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


def test_environment_forces_fallback():
    code = (
        "from nvpolar import kernels, optimizer;"
        "print(kernels.BACKEND, optimizer.optimize(grid_deg=2.0, refine=False).value)"
    )
    env = {**os.environ, "NVPOLAR_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, value = out.stdout.split()
    assert backend == "python"
    assert float(value) == kernels.grid_argmax(*grid_tables(2.0), 0, "relative_contrast")[0]
