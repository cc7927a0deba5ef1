"""Per-channel 2D DFT and the amplitude/phase representation of spectra.

Spectra are unshifted: the DC bin sits at index (0, 0). Power-of-two axes go
through the radix-2 kernel, other lengths through direct summation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels


@dataclass(frozen=True)
class Spectrum:
    """Amplitude and phase planes of a C x H x W spectrum."""

    amplitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        if self.amplitude.shape != self.phase.shape:
            raise ValueError(
                f"amplitude {self.amplitude.shape} and phase {self.phase.shape} differ in shape"
            )
        if self.amplitude.ndim != 3:
            raise ValueError(f"spectrum planes must be C x H x W, got {self.amplitude.shape}")

    @property
    def shape(self):
        return self.amplitude.shape

    def to_complex(self):
        out = np.empty(self.amplitude.shape, dtype=np.complex128)
        out.real = self.amplitude * np.cos(self.phase)
        out.imag = self.amplitude * np.sin(self.phase)
        return out


def as_image(img):
    """Validate and return ``img`` as a float64 C x H x W array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"image must be C x H x W, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"image has a zero-sized dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def _is_pow2(n):
    return n & (n - 1) == 0


@lru_cache(maxsize=None)
def _radix2_tables(n):
    k = np.arange(n // 2)
    twiddle = np.exp(-2j * np.pi * k / n)
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    twiddle.flags.writeable = False
    rev.flags.writeable = False
    return twiddle, rev


@lru_cache(maxsize=None)
def _direct_matrix(n):
    k = np.arange(n)
    # reduce u*h mod n before scaling keeps the angle small and exact
    mat = np.exp(-2j * np.pi * (np.outer(k, k) % n) / n)
    mat.flags.writeable = False
    return mat


def _dft_last_axis(x):
    n = x.shape[-1]
    lead = x.shape[:-1]
    rows = np.ascontiguousarray(x.reshape(-1, n), dtype=np.complex128)
    if n == 1:
        out = rows.copy()
    elif _is_pow2(n):
        twiddle, rev = _radix2_tables(n)
        out = kernels.fft_rows(rows, twiddle, rev)
    else:
        out = rows @ _direct_matrix(n).T
    return out.reshape(*lead, n)


def fft2(x):
    """Unnormalized 2D DFT over the last two axes of a complex or real array."""
    x = np.asarray(x, dtype=np.complex128)
    along_w = _dft_last_axis(x)
    along_h = _dft_last_axis(np.swapaxes(along_w, -1, -2))
    return np.ascontiguousarray(np.swapaxes(along_h, -1, -2))


def ifft2(X):
    """Inverse of :func:`fft2`, including the 1/(H*W) factor."""
    X = np.asarray(X, dtype=np.complex128)
    H, W = X.shape[-2:]
    return np.conj(fft2(np.conj(X))) / (H * W)


def forward_dft(img):
    """Per-channel DFT of ``img`` split into amplitude and phase."""
    X = fft2(as_image(img))
    return Spectrum(np.abs(X), np.angle(X))


def inverse_dft(spec, imag_tol=1e-6):
    """Real part of the inverse DFT of ``spec``.

    With ``imag_tol`` set, a ValueError is raised when the discarded imaginary
    part exceeds it (i.e. the spectrum is not that of a real image).
    """
    x = ifft2(spec.to_complex())
    if imag_tol is not None:
        residue = float(np.max(np.abs(x.imag)))
        if residue >= imag_tol:
            raise ValueError(f"imaginary residue {residue:.3g} exceeds {imag_tol:g}")
    return np.ascontiguousarray(x.real)


def recompose(amplitude, phase):
    """Pair an amplitude plane with a phase plane; negative amplitudes clamp to 0."""
    amplitude = np.asarray(amplitude, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if amplitude.shape != phase.shape:
        raise ValueError(f"amplitude {amplitude.shape} and phase {phase.shape} differ in shape")
    return Spectrum(np.maximum(amplitude, 0.0), phase)
