"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``NVPOLAR_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

logger = logging.getLogger(__name__)

_compiled = None
if os.environ.get("NVPOLAR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        logger.debug("compiled kernels unavailable, using numpy fallback")

BACKEND = "compiled" if _compiled is not None else "python"

TARGET_CODES = {"relative_contrast": 0, "chi": 1}

# Fixed row-chunk size: the reduction is identical for any thread count.
ROW_CHUNK = 512


def backend_module(name: str | None = None):
    if name is None:
        name = BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


def grid_argmax(X, Y, family: int, target: str, threads: int = 1, backend: str | None = None):
    """Maximize a family figure of merit over all pairs of rows of ``X`` and ``Y``.

    ``X`` holds excitation vectors ``P(n_L)`` and ``Y`` emission vectors
    ``I(n_P)``, both of shape ``(n, 4)``. Returns ``(value, i, j)``; among
    equal values the smallest ``i``, then smallest ``j``, wins.
    """
    mod = backend_module(backend)
    code = TARGET_CODES[target]
    X = np.ascontiguousarray(X, dtype=float)
    YT = np.ascontiguousarray(np.asarray(Y, dtype=float).T)
    chunks = [(a, min(a + ROW_CHUNK, len(X))) for a in range(0, len(X), ROW_CHUNK)]

    def run(chunk):
        return mod.grid_argmax(X, YT, family, code, chunk[0], chunk[1])

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    best = (-1.0, -1, -1)
    for res in results:
        if res[0] > best[0]:
            best = res
    return float(best[0]), int(best[1]), int(best[2])
