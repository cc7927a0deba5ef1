"""Soft and hard thresholding with per-channel thresholds derived from the data."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

MAX_ALPHA = 0.05


class ThresholdMode(str, Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class ThresholdSpec:
    mode: ThresholdMode = ThresholdMode.HARD
    alpha: float = MAX_ALPHA

    def __post_init__(self):
        object.__setattr__(self, "mode", ThresholdMode(self.mode))
        if not 0.0 <= self.alpha <= MAX_ALPHA:
            raise ValueError(f"alpha must lie in [0, {MAX_ALPHA}], got {self.alpha}")


def _check_t(T):
    if np.any(np.asarray(T) < 0):
        raise ValueError(f"threshold must be non-negative, got {T}")


def soft_threshold(x, T):
    """Shrink toward zero by ``T``; values with ``|x| <= T`` become 0.

    Works on scalars and arrays (``T`` broadcasts against ``x``).
    """
    _check_t(T)
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x > T, x - T, np.where(x < -np.asarray(T), x + T, 0.0))
    return float(out) if out.ndim == 0 else out


def hard_threshold(x, T):
    """Keep values with ``|x| >= T``, zero the rest."""
    _check_t(T)
    x = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(x) >= T, x, 0.0)
    return float(out) if out.ndim == 0 else out


def dynamic_threshold(amp, alpha):
    """One threshold per channel: ``alpha`` times the channel's largest amplitude."""
    amp = np.asarray(amp, dtype=np.float64)
    if amp.ndim != 3 or amp.size == 0:
        raise ValueError(f"expected a non-empty C x H x W amplitude plane, got {amp.shape}")
    if not 0.0 <= alpha <= MAX_ALPHA:
        raise ValueError(f"alpha must lie in [0, {MAX_ALPHA}], got {alpha}")
    if np.any(amp < 0):
        raise ValueError("amplitude plane has negative entries")
    return alpha * amp.reshape(amp.shape[0], -1).max(axis=1)


def apply_threshold(amp, spec):
    amp = np.asarray(amp, dtype=np.float64)
    T = dynamic_threshold(amp, spec.alpha)[:, None, None]
    if spec.mode is ThresholdMode.SOFT:
        return soft_threshold(amp, T)
    return hard_threshold(amp, T)
