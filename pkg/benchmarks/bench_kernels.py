#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
(the numpy column is what you get with WICKNLS_NO_NUMBA=1)
"""

import time

import numpy as np

from wicknls import _kernels as K


def best_of(fn, *args, repeats=5, min_loops=3):
    best = float("inf")
    for _ in range(repeats):
        loops = 0
        t0 = time.perf_counter()
        while True:
            fn(*args)
            loops += 1
            dt = time.perf_counter() - t0
            if loops >= min_loops and dt > 2e-3:
                break
        best = min(best, dt / loops)
    return best


def fmt(seconds):
    return f"{seconds * 1e6:9.1f} us"


def bench_cubic():
    print("cubic mode convolution (band N -> 3N)")
    print(f"{'N':>6} {'numpy direct':>14} {'numpy fft':>14} {'numba direct':>14}")
    for n in (8, 16, 32, 64, 128, 256, 512):
        c = (np.random.default_rng(n).standard_normal(2 * n + 1)
             + 1j * np.random.default_rng(n + 1).standard_normal(2 * n + 1))
        t_np = best_of(K.cubic_convolution_numpy, c)
        t_fft = best_of(K._cubic_convolution_fft, c)
        if K.HAVE_NUMBA:
            K.cubic_convolution_numba(c)  # compile outside the timer
            t_nb = fmt(best_of(K.cubic_convolution_numba, c))
        else:
            t_nb = "n/a"
        print(f"{n:>6} {fmt(t_np):>14} {fmt(t_fft):>14} {t_nb:>14}")


def bench_hermite():
    print("\nhermite recurrence H_6(x; 1), batched")
    print(f"{'len(x)':>8} {'numpy':>14} {'numba':>14}")
    for size in (1_000, 100_000, 1_000_000):
        x = np.random.default_rng(size).standard_normal(size)
        t_np = best_of(K.hermite_batch_numpy, 6, x, 1.0)
        if K.HAVE_NUMBA:
            K.hermite_batch_numba(6, x, 1.0)
            t_nb = fmt(best_of(K.hermite_batch_numba, 6, x, 1.0))
        else:
            t_nb = "n/a"
        print(f"{size:>8} {fmt(t_np):>14} {t_nb:>14}")


def bench_phase():
    print("\npointwise nonlinear phase (split-step inner op)")
    print(f"{'grid':>8} {'numpy':>14} {'numba':>14}")
    for size in (525, 1575, 4725):
        rng = np.random.default_rng(size)
        u = rng.standard_normal(size) + 1j * rng.standard_normal(size)

        def run_numpy():
            K.nonlinear_phase_numpy(u.copy(), 1e-3, -0.2)

        t_np = best_of(run_numpy)
        if K.HAVE_NUMBA:
            K.nonlinear_phase_numba(u.copy(), 1e-3, -0.2)

            def run_numba():
                K.nonlinear_phase_numba(u.copy(), 1e-3, -0.2)

            t_nb = fmt(best_of(run_numba))
        else:
            t_nb = "n/a"
        print(f"{size:>8} {fmt(t_np):>14} {t_nb:>14}")


if __name__ == "__main__":
    print(f"numba available: {K.HAVE_NUMBA} "
          f"(direct-conv dispatch cutoff: N <= {K.DIRECT_CONV_MAX_MODE})\n")
    bench_cubic()
    bench_hermite()
    bench_phase()
