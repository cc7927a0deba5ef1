# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: radix-2 FFT butterflies, 3x3 box mean, Hausdorff scan.

Each function mirrors one in ``_fallback.py`` operation for operation so the
two backends agree to the last bit on identical inputs.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def fft_rows(x not None, twiddle not None, bitrev not None):
    """Unnormalized forward DFT of every row of ``x`` (row length a power of two)."""
    out = np.ascontiguousarray(np.asarray(x, dtype=np.complex128)[:, bitrev])
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = out.view(np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wr = np.ascontiguousarray(twiddle.real)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wi = np.ascontiguousarray(twiddle.imag)
    cdef Py_ssize_t rows = v.shape[0]
    cdef Py_ssize_t n = v.shape[1] // 2
    cdef Py_ssize_t r, m, half, step, start, j, a, b
    cdef double tr, ti, ur, ui, cr, ci, br, bi

    with nogil:
        for r in range(rows):
            m = 2
            while m <= n:
                half = m // 2
                step = n // m
                start = 0
                while start < n:
                    for j in range(half):
                        a = 2 * (start + j)
                        b = a + 2 * half
                        cr = wr[j * step]
                        ci = wi[j * step]
                        br = v[r, b]
                        bi = v[r, b + 1]
                        tr = cr * br - ci * bi
                        ti = cr * bi + ci * br
                        ur = v[r, a]
                        ui = v[r, a + 1]
                        v[r, a] = ur + tr
                        v[r, a + 1] = ui + ti
                        v[r, b] = ur - tr
                        v[r, b + 1] = ui - ti
                    start += m
                m *= 2
    return out


def box_mean3(cnp.ndarray[cnp.float64_t, ndim=3] planes not None):
    """3x3 neighbourhood mean per channel with edge replication."""
    cdef Py_ssize_t C = planes.shape[0]
    cdef Py_ssize_t H = planes.shape[1]
    cdef Py_ssize_t W = planes.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((C, H, W), dtype=np.float64)
    cdef Py_ssize_t c, h, w, di, dj, hh, ww
    cdef double acc
    cdef bint first

    with nogil:
        for c in range(C):
            for h in range(H):
                for w in range(W):
                    first = True
                    acc = 0.0
                    for di in range(-1, 2):
                        hh = h + di
                        if hh < 0:
                            hh = 0
                        elif hh >= H:
                            hh = H - 1
                        for dj in range(-1, 2):
                            ww = w + dj
                            if ww < 0:
                                ww = 0
                            elif ww >= W:
                                ww = W - 1
                            if first:
                                acc = planes[c, hh, ww]
                                first = False
                            else:
                                acc = acc + planes[c, hh, ww]
                    out[c, h, w] = acc / 9.0
    return out


def directed_hausdorff_sq(cnp.ndarray[cnp.int64_t, ndim=2] a not None,
                          cnp.ndarray[cnp.int64_t, ndim=2] b not None):
    """max over points of ``a`` of the squared distance to the nearest point of ``b``."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i, k
    cdef long long best, d, dy, dx, worst = 0

    with nogil:
        for i in range(n):
            best = -1
            for k in range(m):
                dy = a[i, 0] - b[k, 0]
                dx = a[i, 1] - b[k, 1]
                d = dy * dy + dx * dx
                if best < 0 or d < best:
                    best = d
                    if best == 0:
                        break
            if best > worst:
                worst = best
    return worst
