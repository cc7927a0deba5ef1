"""Per-pixel logistic segmentation model with hand-derived gradients.

Features at each pixel are the raw channel values followed by their 3x3
neighbourhood means (edges replicated); weights are those 2*C coefficients
plus a trailing bias, so D = 2*C + 1.

Checkpoint layout (little-endian): b"FDGM" | version u16 | D u32 | D f64.
"""

import struct
from pathlib import Path

import numpy as np

from . import kernels
from .spectral import as_image

PROB_EPS = 1e-7
MAGIC = b"FDGM"
VERSION = 1
_HEADER = struct.Struct("<4sHI")


class CheckpointError(ValueError):
    pass


def num_params(channels):
    return 2 * channels + 1


def featurize(img):
    """(2C, H, W) feature planes: channel values then 3x3 means."""
    img = as_image(img)
    return np.concatenate([img, kernels.box_mean3(np.ascontiguousarray(img))], axis=0)


def _check_dim(params, n_features):
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (n_features + 1,):
        raise ValueError(
            f"model has {params.shape[0] if params.ndim == 1 else params.shape} weights, "
            f"features need {n_features + 1}"
        )
    return params


def _logits(params, feats):
    return np.tensordot(params[:-1], feats, axes=1) + params[-1]


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict(params, img=None, feats=None):
    """Foreground probability plane (H, W). Pass ``feats`` to skip featurizing."""
    if feats is None:
        feats = featurize(img)
    params = _check_dim(params, feats.shape[0])
    return sigmoid(np.asarray(_logits(params, feats), dtype=np.float64))


def loss_and_grad(params, img=None, mask=None, prox_center=None, mu=0.0, feats=None):
    """Mean pixel BCE (+ proximal term) and its exact gradient.

    Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS]; inside the clamped
    region the loss is flat, so those pixels contribute no gradient.
    """
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    if mu > 0 and prox_center is None:
        raise ValueError("mu > 0 requires a proximal center")
    if feats is None:
        feats = featurize(img)
    params = _check_dim(params, feats.shape[0])
    y = np.asarray(mask, dtype=np.float64)
    if y.shape != feats.shape[1:]:
        raise ValueError(f"mask {y.shape} does not match image {feats.shape[1:]}")

    p = sigmoid(np.asarray(_logits(params, feats), dtype=np.float64))
    pc = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    n = y.size
    loss = -float(np.sum(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))) / n

    dz = np.where((p > PROB_EPS) & (p < 1.0 - PROB_EPS), p - y, 0.0) / n
    grad = np.empty_like(params)
    grad[:-1] = np.tensordot(feats, dz, axes=([1, 2], [0, 1]))
    grad[-1] = dz.sum()

    if mu > 0:
        diff = params - np.asarray(prox_center, dtype=np.float64)
        loss += 0.5 * mu * float(diff @ diff)
        grad += mu * diff
    return loss, grad


def sgd_step(params, grad, lr):
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    return np.asarray(params, dtype=np.float64) - lr * np.asarray(grad, dtype=np.float64)


def init_params(channels, seed, scale=0.01):
    rng = np.random.default_rng([int(seed), 0xF06])
    return scale * rng.standard_normal(num_params(channels))


def save_checkpoint(path, params):
    params = np.ascontiguousarray(params, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, params.shape[0]))
        fh.write(params.tobytes())


def load_checkpoint(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointError("truncated checkpoint header")
    magic, version, D = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(data) != _HEADER.size + 8 * D:
        raise CheckpointError(f"expected {D} weights, payload is {len(data) - _HEADER.size} bytes")
    return np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(np.float64)
