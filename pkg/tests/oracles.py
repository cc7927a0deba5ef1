"""Independent reference implementations used by the tests.

Nothing here imports freqfed: each oracle recomputes its quantity from the
defining formula, either with scalar loops or with a dense matrix.
"""

import cmath
import math

import numpy as np


def dft_matrix_2d(H, W, sign=-1):
    """Dense (HW x HW) matrix of exp(sign*2*pi*i*(u*h/H + v*w/W))."""
    u, v = np.divmod(np.arange(H * W), W)
    phase = np.outer(u, u) % H / H + np.outer(v, v) % W / W
    return np.exp(sign * 2j * np.pi * phase)


def naive_dft(x):
    """Per-channel 2D DFT by direct O((HW)^2) summation."""
    x = np.asarray(x, dtype=np.complex128)
    C, H, W = x.shape
    F = dft_matrix_2d(H, W)
    return (x.reshape(C, H * W) @ F.T).reshape(C, H, W)


def naive_idft(X):
    X = np.asarray(X, dtype=np.complex128)
    C, H, W = X.shape
    F = dft_matrix_2d(H, W, sign=+1)
    return (X.reshape(C, H * W) @ F.T).reshape(C, H, W) / (H * W)


def scalar_dft(plane):
    """Single-channel DFT with Python complex arithmetic, for tiny planes."""
    H, W = len(plane), len(plane[0])
    out = [[0j] * W for _ in range(H)]
    for u in range(H):
        for v in range(W):
            acc = 0j
            for h in range(H):
                for w in range(W):
                    acc += plane[h][w] * cmath.exp(-2j * math.pi * (u * h / H + v * w / W))
            out[u][v] = acc
    return out


def band_indices(n, beta):
    """Unshifted indices whose DC-centred offset lies within beta*n/2."""
    shifted = np.fft.fftshift(np.arange(n))  # shifted position s holds index shifted[s]
    return sorted(int(shifted[s]) for s in range(n) if abs(s - n // 2) <= beta * n / 2)


def mask_bits(H, W, beta):
    M = np.zeros((H, W))
    for u in band_indices(H, beta):
        for v in band_indices(W, beta):
            M[u, v] = 1.0
    return M


def soft(x, T):
    if x > T:
        return x - T
    if x < -T:
        return x + T
    return 0.0


def hard(x, T):
    return x if abs(x) >= T else 0.0


def mix(A, At, lam, M, mode, alpha, variant):
    """Amplitude mixing evaluated one element at a time."""
    C, H, W = A.shape
    out = np.zeros_like(A)
    for c in range(C):
        T = alpha * max(At[c].ravel().tolist())
        for u in range(H):
            for v in range(W):
                a, t, m = float(A[c, u, v]), float(At[c, u, v]), float(M[u, v])
                if mode == "soft":
                    t = soft(t, T)
                elif mode == "hard":
                    t = hard(t, T)
                if variant == "literal":
                    out[c, u, v] = (1 - lam) * a * (1 - m) + lam * t * m
                else:
                    out[c, u, v] = a * (1 - m) + ((1 - lam) * a + lam * t) * m
    return out


def augment(src, target_amp, lam, beta, mode, alpha, variant, clamp=True):
    """Naive DFT, scalar mixing, source phase, naive inverse, real part, clamp."""
    X = naive_dft(src)
    A, P = np.abs(X), np.angle(X)
    mixed = mix(A, target_amp, lam, mask_bits(*src.shape[1:], beta), mode, alpha, variant)
    out = naive_idft(mixed * np.exp(1j * P)).real
    return np.clip(out, 0, 1) if clamp else out


def box_mean(img):
    """3x3 mean per channel with edge replication, by nested loops."""
    C, H, W = img.shape
    out = np.zeros_like(img)
    for c in range(C):
        for i in range(H):
            for j in range(W):
                s = 0.0
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        ii = min(max(i + di, 0), H - 1)
                        jj = min(max(j + dj, 0), W - 1)
                        s += img[c, ii, jj]
                out[c, i, j] = s / 9
    return out


def pixel_prob(params, img):
    """Model probability plane evaluated per pixel with math.exp."""
    C, H, W = img.shape
    means = box_mean(img)
    out = np.zeros((H, W))
    for i in range(H):
        for j in range(W):
            z = params[-1]
            for c in range(C):
                z += params[c] * img[c, i, j] + params[C + c] * means[c, i, j]
            out[i, j] = 1 / (1 + math.exp(-z))
    return out


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def hausdorff(a_mask, b_mask):
    a = [(i, j) for i, j in zip(*np.nonzero(a_mask))]
    b = [(i, j) for i, j in zip(*np.nonzero(b_mask))]

    def directed(p, q):
        return max(min(math.sqrt((y1 - y2) ** 2 + (x1 - x2) ** 2) for y2, x2 in q) for y1, x1 in p)

    return max(directed(a, b), directed(b, a))


def counts(pred, truth):
    inter = n_p = n_t = union = 0
    for p, t in zip(np.ravel(pred).tolist(), np.ravel(truth).tolist()):
        p, t = bool(p), bool(t)
        inter += p and t
        n_p += p
        n_t += t
        union += p or t
    return inter, n_p, n_t, union


def in_ellipse(H, W, cy, cx, ry, rx, theta):
    out = np.zeros((H, W), dtype=bool)
    c, s = math.cos(theta), math.sin(theta)
    for h in range(H):
        for w in range(W):
            dy, dx = h - cy, w - cx
            u = (dy * c + dx * s) / ry
            v = (-dy * s + dx * c) / rx
            out[h, w] = u * u + v * v <= 1
    return out
