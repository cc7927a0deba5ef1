"""Cross-domain image synthesis by masked, thresholded amplitude mixing.

The source image keeps its phase; inside a low-frequency band its amplitude is
replaced by a thresholded foreign amplitude weighted by ``lam``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .spectral import as_image, forward_dft, inverse_dft, recompose
from .threshold import ThresholdSpec, apply_threshold

DEFAULT_BETA = 0.1


class MixVariant(str, Enum):
    LITERAL = "literal"
    PRESERVE = "preserve-outside-mask"


@dataclass(frozen=True)
class FrequencyMask:
    """Binary H x W selector of the low-frequency band, in unshifted indices."""

    bits: np.ndarray
    beta: float

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def width(self):
        return self.bits.shape[1]


def _signed_freq(n):
    # DC-centred offset of every unshifted index; the even-length Nyquist bin maps to -n/2
    return (np.arange(n) + n // 2) % n - n // 2


def make_low_freq_mask(H, W, beta=DEFAULT_BETA):
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if H < 1 or W < 1:
        raise ValueError(f"mask dimensions must be positive, got {H}x{W}")
    rows = np.abs(_signed_freq(H)) <= beta * H / 2
    cols = np.abs(_signed_freq(W)) <= beta * W / 2
    bits = (rows[:, None] & cols[None, :]).astype(np.float64)
    bits.flags.writeable = False
    return FrequencyMask(bits, float(beta))


def full_mask(H, W):
    return make_low_freq_mask(H, W, 1.0)


@dataclass(frozen=True)
class AugmentParams:
    lam: float
    threshold: ThresholdSpec | None = field(default_factory=ThresholdSpec)
    mask: FrequencyMask | None = None
    variant: MixVariant = MixVariant.LITERAL
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lambda must lie in (0, 1], got {self.lam}")
        object.__setattr__(self, "variant", MixVariant(self.variant))


def mix_amplitudes(A, A_target, lam, mask, thr=None, variant=MixVariant.LITERAL):
    """Blend a source amplitude with a thresholded target amplitude.

    ``literal``: ``(1-lam)*A*(1-M) + lam*Thr(At)*M``.
    ``preserve-outside-mask``: ``A*(1-M) + ((1-lam)*A + lam*Thr(At))*M``, which
    leaves the source untouched outside the band. ``thr=None`` skips thresholding.
    """
    A = np.asarray(A, dtype=np.float64)
    A_target = np.asarray(A_target, dtype=np.float64)
    if A.shape != A_target.shape:
        raise ValueError(f"source amplitude {A.shape} and target {A_target.shape} differ")
    if A.shape[-2:] != mask.bits.shape:
        raise ValueError(f"mask {mask.bits.shape} does not match amplitude {A.shape}")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    M = mask.bits
    target = A_target if thr is None else apply_threshold(A_target, thr)
    if MixVariant(variant) is MixVariant.LITERAL:
        return (1.0 - lam) * A * (1.0 - M) + lam * target * M
    return A * (1.0 - M) + ((1.0 - lam) * A + lam * target) * M


def generate_augmented(src, target_amp, params, clamp=True):
    """Synthesize one image: source phase with the mixed amplitude."""
    src = as_image(src)
    target_amp = np.asarray(target_amp, dtype=np.float64)
    if target_amp.shape != src.shape:
        raise ValueError(f"target amplitude {target_amp.shape} does not match image {src.shape}")
    mask = params.mask if params.mask is not None else make_low_freq_mask(*src.shape[1:])
    spec = forward_dft(src)
    mixed = mix_amplitudes(
        spec.amplitude, target_amp, params.lam, mask, params.threshold, params.variant
    )
    out = inverse_dft(recompose(mixed, spec.phase), imag_tol=None)
    return np.clip(out, 0.0, 1.0) if clamp else out


def sample_lambda(rng):
    """Uniform draw from (0, 1]."""
    return 1.0 - rng.random()


def comparison_panels(src, target, lam, beta=DEFAULT_BETA, alpha=0.05,
                      variant=MixVariant.LITERAL, clamp=True):
    """Source, target and three syntheses: plain mix, soft- and hard-thresholded.

    The target contributes only its masked amplitude, as it would through the bank.
    """
    src = as_image(src)
    target = as_image(target)
    mask = make_low_freq_mask(src.shape[1], src.shape[2], beta)
    target_amp = forward_dft(target).amplitude * mask.bits
    panels = {"source": src, "target": target}
    for name, thr in (
        ("dft", None),
        ("dft_st", ThresholdSpec("soft", alpha)),
        ("dft_ht", ThresholdSpec("hard", alpha)),
    ):
        params = AugmentParams(lam, thr, mask, variant)
        panels[name] = generate_augmented(src, target_amp, params, clamp=clamp)
    return panels
