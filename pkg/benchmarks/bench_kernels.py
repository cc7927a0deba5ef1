"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Each backend module is called directly, so one process times both. The
end-to-end row swaps the backend used by ``freqfed.spectral`` for one
augmentation of a 3x64x64 image.
"""

import argparse
import time

import numpy as np

from freqfed import _fallback, kernels, spectral
from freqfed.augment import AugmentParams, generate_augmented


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    img = rng.random((3, 64, 64))
    rows = np.ascontiguousarray(rng.random((192, 64)) + 1j * rng.random((192, 64)))
    twiddle, rev = spectral._radix2_tables(64)
    a = np.argwhere(rng.random((64, 64)) < 0.15).astype(np.int64)
    b = np.argwhere(rng.random((64, 64)) < 0.15).astype(np.int64)
    target = spectral.forward_dft(rng.random((3, 64, 64))).amplitude
    params = AugmentParams(0.7)
    return {
        "fft_rows 192x64": lambda m: m.fft_rows(rows, twiddle, rev),
        "box_mean3 3x64x64": lambda m: m.box_mean3(img),
        f"hausdorff {len(a)}x{len(b)} pts": lambda m: m.directed_hausdorff_sq(a, b),
        "augment 3x64x64": lambda m: _with_backend(m, lambda: generate_augmented(img, target, params)),
    }


def _with_backend(module, fn):
    saved = kernels.fft_rows
    kernels.fft_rows = module.fft_rows
    try:
        return fn()
    finally:
        kernels.fft_rows = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    compiled = kernels.compiled_module()
    if compiled is None:
        print("compiled extension not built; only the python backend is available")
    print(f"{'kernel':<26}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for name, run in cases(np.random.default_rng(0)).items():
        py = best_of(lambda: run(_fallback), args.repeat)
        if compiled is None:
            print(f"{name:<26}{py * 1e3:>12.3f}{'-':>14}{'-':>10}")
            continue
        c = best_of(lambda: run(compiled), args.repeat)
        print(f"{name:<26}{py * 1e3:>12.3f}{c * 1e3:>14.3f}{py / c:>9.1f}x")


if __name__ == "__main__":
    main()
