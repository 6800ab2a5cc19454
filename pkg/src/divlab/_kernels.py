"""Compiled inner loops for truncated Fourier-Taylor products.

The product is a direct (not FFT) double sum, so every output coefficient
only ever sees the terms that actually land on its mode.  Round-off then
stays relative per mode, which matters when a later complex h-shift
multiplies mode ``j`` by ``exp(|j| Im s)``.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def row_supports(a):
    """First and last nonzero column of each row (``lo > hi`` when empty)."""
    nr, nc = a.shape
    sup = np.empty((nr, 2), dtype=np.int64)
    for n in range(nr):
        lo = nc
        hi = -1
        for c in range(nc):
            if a[n, c] != 0:
                if lo == nc:
                    lo = c
                hi = c
        sup[n, 0] = lo
        sup[n, 1] = hi
    return sup


@njit(cache=True)
def mul_truncated(a, b, out_order, J):
    """sum over n1+n2 <= out_order, |j1+j2| <= J of a[n1,j1] b[n2,j2]."""
    nr = a.shape[0]
    width = 2 * J + 1
    out = np.zeros((nr, width), dtype=np.complex128)
    sa = row_supports(a)
    sb = row_supports(b)
    for n1 in range(min(nr, out_order + 1)):
        alo = sa[n1, 0]
        ahi = sa[n1, 1]
        if alo > ahi:
            continue
        for n2 in range(min(b.shape[0], out_order + 1 - n1)):
            blo = sb[n2, 0]
            bhi = sb[n2, 1]
            if blo > bhi:
                continue
            n = n1 + n2
            for ca in range(alo, ahi + 1):
                x = a[n1, ca]
                if x == 0:
                    continue
                # output column = ca + cb - J must lie in [0, width)
                lo = max(blo, J - ca)
                hi = min(bhi, width - 1 + J - ca)
                for cb in range(lo, hi + 1):
                    out[n, ca + cb - J] += x * b[n2, cb]
    return out


@njit(cache=True)
def substitute_rows(c, ypow, n_lo, out_order, J):
    """sum_{n >= n_lo} c[n](h) * ypow[n](h, v), truncated at ``out_order``.

    ``ypow[n]`` is the n-th power of the substituted vertical series.
    """
    nr, width = c.shape
    out = np.zeros((nr, width), dtype=np.complex128)
    sc = row_supports(c)
    for n in range(n_lo, min(nr, ypow.shape[0])):
        clo = sc[n, 0]
        chi = sc[n, 1]
        if clo > chi:
            continue
        y = ypow[n]
        sy = row_supports(y)
        for r in range(min(nr, out_order + 1)):
            ylo = sy[r, 0]
            yhi = sy[r, 1]
            if ylo > yhi:
                continue
            for ca in range(clo, chi + 1):
                x = c[n, ca]
                if x == 0:
                    continue
                lo = max(ylo, J - ca)
                hi = min(yhi, width - 1 + J - ca)
                for cb in range(lo, hi + 1):
                    out[r, ca + cb - J] += x * y[r, cb]
    return out
