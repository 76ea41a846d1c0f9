"""Independent reference implementations used to freeze expected values.

Nothing here imports the package: the geometry is rebuilt from the
tetrahedral axes and the grids are Fibonacci point sets rather than the
equiangular grid used by the optimizer.
"""
from __future__ import annotations

import math

import numpy as np

AXES = np.array([[1, 1, 1], [1, -1, -1], [-1, -1, 1], [-1, 1, -1]], dtype=float) / math.sqrt(3.0)


def fibonacci_hemisphere(spacing_deg: float) -> np.ndarray:
    """Near-uniform points on z >= 0 with mean nearest-neighbour spacing ~ ``spacing_deg``."""
    d = math.radians(spacing_deg)
    n = int(math.ceil(2.0 * math.pi / (d * d)))
    k = np.arange(n) + 0.5
    z = 1.0 - k / n  # uniform in z on (0, 1]
    r = np.sqrt(1.0 - z * z)
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def weights_direct(n_L, n_P):
    """R, C/C0 and chi from the defining expressions, one family at a time."""
    n_L = np.asarray(n_L, dtype=float)
    n_P = np.asarray(n_P, dtype=float)
    n_L = n_L / math.sqrt(float(n_L @ n_L))
    n_P = n_P / math.sqrt(float(n_P @ n_P))
    prod = []
    for a in AXES:
        p = 1.0 - float(a @ n_L) ** 2
        i = 1.0 - float(a @ n_P) ** 2
        prod.append(p * i)
    total = math.fsum(prod)
    r = [x / total for x in prod]
    chi = [x / math.sqrt(total) for x in prod]
    return r, chi, total


def _brute_force_python(P, I, k):
    best_r = best_chi = -1.0
    for row in P:
        prod = row[None, :] * I
        tot = prod.sum(axis=1)
        ok = tot > 0
        r = prod[ok, k] / tot[ok]
        c = prod[ok, k] / np.sqrt(tot[ok])
        best_r = max(best_r, float(r.max()))
        best_chi = max(best_chi, float(c.max()))
    return best_r, best_chi


try:
    import numba

    @numba.njit(cache=True)
    def _brute_force_numba(P, I, k):  # pragma: no cover - compiled
        best_r = 0.0
        best_chi2 = 0.0
        n = P.shape[0]
        m = I.shape[0]
        for a in range(n):
            p0, p1, p2, p3 = P[a, 0], P[a, 1], P[a, 2], P[a, 3]
            pk = P[a, k]
            for b in range(m):
                tot = p0 * I[b, 0] + p1 * I[b, 1] + p2 * I[b, 2] + p3 * I[b, 3]
                if tot <= 0.0:
                    continue
                num = pk * I[b, k]
                # compare without dividing; square chi to skip the root
                if num > best_r * tot:
                    best_r = num / tot
                if num * num > best_chi2 * tot:
                    best_chi2 = num * num / tot
        return best_r, math.sqrt(best_chi2)

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def brute_force_optimum(spacing_deg: float, family: int = 0):
    """Maximum R and chi of one family over all pairs of Fibonacci directions.

    Both sign-related halves of each sphere give the same P and I, so one
    hemisphere per vector covers both full spheres.
    """
    pts = fibonacci_hemisphere(spacing_deg)
    c = pts @ AXES.T
    table = 1.0 - c * c
    if HAVE_NUMBA:
        return _brute_force_numba(table, table, family)
    return _brute_force_python(table, table, family)


def suppression_angle(axis, e1, e2) -> float:
    """Angle in [0, pi) of the in-plane direction parallel to the projection of ``axis``."""
    axis = np.asarray(axis, dtype=float)
    return math.atan2(float(axis @ e2), float(axis @ e1)) % math.pi
