# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the pairwise grid search.

Must give bit-identical results to ``nvpolar._pykernels.grid_argmax``: the
weighted sum is accumulated left to right and the value is only committed
after an exact ``v > best`` comparison.
"""

from libc.math cimport sqrt

# Slack on the division-free prefilter so a rounding edge never hides a
# genuine improvement; the exact comparison follows.
cdef double _SLACK = 1.0 - 1e-12


def grid_argmax(const double[:, ::1] X, const double[:, ::1] YT, int family, int target,
                Py_ssize_t row_start, Py_ssize_t row_stop):
    """Best value of family ``family`` over rows ``[row_start, row_stop)`` of X and all of Y.

    ``target`` 0 maximizes ``x_k y_k / s``, 1 maximizes ``x_k y_k / sqrt(s)``,
    where ``s = sum_l x_l y_l``. Pairs with ``s <= 0`` are skipped. Returns
    ``(best, i, j)``; ``i = j = -1`` when no valid pair exists.
    """
    cdef Py_ssize_t n = YT.shape[1], i, j
    cdef double best = -1.0, bound
    cdef double x0, x1, x2, x3, xk, s, p, v
    cdef Py_ssize_t bi = -1, bj = -1
    cdef const double[::1] y0 = YT[0]
    cdef const double[::1] y1 = YT[1]
    cdef const double[::1] y2 = YT[2]
    cdef const double[::1] y3 = YT[3]
    cdef const double[::1] yk = YT[family]
    with nogil:
        for i in range(row_start, row_stop):
            x0 = X[i, 0]
            x1 = X[i, 1]
            x2 = X[i, 2]
            x3 = X[i, 3]
            xk = X[i, family]
            if target == 0:
                bound = best * _SLACK
                for j in range(n):
                    s = x0 * y0[j] + x1 * y1[j] + x2 * y2[j] + x3 * y3[j]
                    p = xk * yk[j]
                    if p >= bound * s and s > 0.0:
                        v = p / s
                        if v > best:
                            best = v
                            bi = i
                            bj = j
                            bound = best * _SLACK
            else:
                bound = best * best * _SLACK if best > 0.0 else -1.0
                for j in range(n):
                    s = x0 * y0[j] + x1 * y1[j] + x2 * y2[j] + x3 * y3[j]
                    p = xk * yk[j]
                    if p * p >= bound * s and s > 0.0:
                        v = p / sqrt(s)
                        if v > best:
                            best = v
                            bi = i
                            bj = j
                            bound = best * best * _SLACK
    return best, bi, bj
