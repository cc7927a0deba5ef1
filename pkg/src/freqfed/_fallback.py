"""Pure numpy versions of the compiled kernels.

Same operation order as ``_kernels.pyx``; used when the extension is not built
or when ``FREQFED_BACKEND=python`` is set.
"""

import numpy as np

_HD_CHUNK = 2048


def fft_rows(x, twiddle, bitrev):
    """Unnormalized forward DFT of every row of ``x`` (row length a power of two)."""
    rows, n = x.shape
    re = np.ascontiguousarray(x.real[:, bitrev])
    im = np.ascontiguousarray(x.imag[:, bitrev])
    wr = twiddle.real
    wi = twiddle.imag
    m = 2
    while m <= n:
        half = m // 2
        step = n // m
        cr = wr[: half * step : step]
        ci = wi[: half * step : step]
        re3 = re.reshape(rows, n // m, m)
        im3 = im.reshape(rows, n // m, m)
        br, bi = re3[:, :, half:], im3[:, :, half:]
        tr = cr * br - ci * bi
        ti = cr * bi + ci * br
        ur = re3[:, :, :half].copy()
        ui = im3[:, :, :half].copy()
        re3[:, :, :half] = ur + tr
        im3[:, :, :half] = ui + ti
        re3[:, :, half:] = ur - tr
        im3[:, :, half:] = ui - ti
        m *= 2
    out = np.empty((rows, n), dtype=np.complex128)
    out.real = re
    out.imag = im
    return out


def box_mean3(planes):
    """3x3 neighbourhood mean per channel with edge replication."""
    _, H, W = planes.shape
    padded = np.pad(planes, ((0, 0), (1, 1), (1, 1)), mode="edge")
    acc = None
    for di in range(3):
        for dj in range(3):
            window = padded[:, di : di + H, dj : dj + W]
            acc = window.copy() if acc is None else acc + window
    return acc / 9.0


def directed_hausdorff_sq(a, b):
    """max over points of ``a`` of the squared distance to the nearest point of ``b``."""
    worst = 0
    for lo in range(0, len(a), _HD_CHUNK):
        chunk = a[lo : lo + _HD_CHUNK]
        dy = chunk[:, None, 0] - b[None, :, 0]
        dx = chunk[:, None, 1] - b[None, :, 1]
        nearest = (dy * dy + dx * dx).min(axis=1)
        worst = max(worst, int(nearest.max()))
    return worst
