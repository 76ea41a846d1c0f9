"""Pure-numpy twin of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np

_BLOCK = 64


def grid_argmax(X, YT, family, target, row_start, row_stop):
    X = np.asarray(X, dtype=float)
    YT = np.asarray(YT, dtype=float)
    y0, y1, y2, y3 = YT[0], YT[1], YT[2], YT[3]
    yk = YT[family]
    best, bi, bj = -1.0, -1, -1
    for start in range(row_start, row_stop, _BLOCK):
        xb = X[start:min(start + _BLOCK, row_stop)]
        # same left-to-right accumulation as the compiled loop
        s = xb[:, 0:1] * y0 + xb[:, 1:2] * y1 + xb[:, 2:3] * y2 + xb[:, 3:4] * y3
        p = xb[:, family:family + 1] * yk
        with np.errstate(invalid="ignore", divide="ignore"):
            v = p / s if target == 0 else p / np.sqrt(s)
        v = np.where(s > 0.0, v, -np.inf)
        flat = int(np.argmax(v))
        value = v.flat[flat]
        if value > best:
            best = float(value)
            bi = start + flat // v.shape[1]
            bj = flat % v.shape[1]
    return best, bi, bj
