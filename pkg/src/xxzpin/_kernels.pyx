# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matrix-free apply for XXZ chains with one transverse field site."""

from cython.parallel cimport prange

import numpy as np


def apply_xxz(const double[::1] diag,
              const double complex[::1] v,
              double complex[::1] out,
              int d, int nsites,
              const long[::1] bonds,
              double hop,
              const double[::1] up,
              int ysite,
              double complex cp,
              double complex cm):
    """out = H v, one output row at a time (gather form, thread safe)."""
    cdef Py_ssize_t dim = v.shape[0]
    cdef Py_ssize_t nb = bonds.shape[0]
    cdef long strides[64]
    cdef Py_ssize_t i, t
    cdef long x, sx, sx1, kx, kx1, ky, sy, mask
    cdef double complex acc
    cdef double complex hop2 = hop * up[1] * up[1] if d == 2 else 0
    cdef bint transverse = (cp != 0) or (cm != 0)
    if nsites > 64:
        raise ValueError("at most 64 sites")
    strides[nsites - 1] = 1
    for t in range(nsites - 2, -1, -1):
        strides[t] = strides[t + 1] * d
    sy = strides[ysite] if 0 <= ysite < nsites else 1

    if d == 2:
        # spin 1/2: digits are bits, a hop flips two unequal neighbours
        for i in prange(dim, nogil=True, schedule="static"):
            acc = diag[i] * v[i]
            for t in range(nb):
                sx = strides[bonds[t] + 1]
                mask = 3 * sx
                kx = (i & mask) // sx
                if kx == 1 or kx == 2:
                    acc = acc + hop2 * v[i ^ mask]
            if transverse:
                if i & sy:
                    acc = acc + cm * up[1] * v[i - sy]
                else:
                    acc = acc + cp * up[1] * v[i + sy]
            out[i] = acc
        return np.asarray(out)

    for i in prange(dim, nogil=True, schedule="static"):
        acc = diag[i] * v[i]
        for t in range(nb):
            x = bonds[t]
            sx = strides[x]
            sx1 = strides[x + 1]
            kx = (i // sx) % d
            kx1 = (i // sx1) % d
            # S+_x S-_{x+1}: source has k_x + 1, k_{x+1} - 1
            if kx + 1 < d and kx1 >= 1:
                acc = acc + hop * up[kx + 1] * up[kx1] * v[i + sx - sx1]
            # S-_x S+_{x+1}: source has k_x - 1, k_{x+1} + 1
            if kx >= 1 and kx1 + 1 < d:
                acc = acc + hop * up[kx] * up[kx1 + 1] * v[i - sx + sx1]
        if transverse:
            ky = (i // sy) % d
            if ky + 1 < d:
                acc = acc + cp * up[ky + 1] * v[i + sy]
            if ky >= 1:
                acc = acc + cm * up[ky] * v[i - sy]
        out[i] = acc
    return np.asarray(out)
