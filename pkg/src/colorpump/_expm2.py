"""Batched exponential of one real 2x2 matrix at many time points."""

import numba as nb
import numpy as np

_TAYLOR_DEGREE = 18


@nb.njit(cache=True)
def _expm_ts(A, ts, out):
    a00, a01, a10, a11 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    # diagonal similarity equalizing |a01| and |a10|; undone on output
    beta = 1.0
    if a01 != 0.0 and a10 != 0.0:
        beta = np.sqrt(abs(a10 / a01))
        a01 *= beta
        a10 /= beta
    norm = max(abs(a00) + abs(a01), abs(a10) + abs(a11))
    for k in range(ts.shape[0]):
        t = ts[k]
        # scale so that ||A t / 2^s|| <= 1/2, Taylor-expand, square back
        s = 0
        x = norm * t
        while x > 0.5:
            x *= 0.5
            s += 1
        c = t / 2.0 ** s
        x00, x01, x10, x11 = a00 * c, a01 * c, a10 * c, a11 * c
        # Horner: E = I + X (I + X/2 (I + X/3 (...)))
        e00, e01, e10, e11 = 1.0, 0.0, 0.0, 1.0
        for j in range(_TAYLOR_DEGREE, 0, -1):
            m00 = (x00 * e00 + x01 * e10) / j
            m01 = (x00 * e01 + x01 * e11) / j
            m10 = (x10 * e00 + x11 * e10) / j
            m11 = (x10 * e01 + x11 * e11) / j
            e00, e01, e10, e11 = 1.0 + m00, m01, m10, 1.0 + m11
        for _ in range(s):
            e00, e01, e10, e11 = (e00 * e00 + e01 * e10, e00 * e01 + e01 * e11,
                                  e10 * e00 + e11 * e10, e10 * e01 + e11 * e11)
        out[k, 0, 0] = e00
        out[k, 0, 1] = e01 / beta
        out[k, 1, 0] = e10 * beta
        out[k, 1, 1] = e11


def expm_2x2(A, ts):
    """exp(A t) for every t in ``ts``; returns shape (len(ts), 2, 2)."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    ts = np.ascontiguousarray(np.atleast_1d(ts), dtype=np.float64)
    out = np.empty((ts.shape[0], 2, 2))
    _expm_ts(A, ts, out)
    return out
