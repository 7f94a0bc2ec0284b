"""Time the compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both paths are called directly, so FRACTAL_SPECTRA_JIT does not matter here.
The first compiled call (cache load or compile) is excluded from timings.
"""

import argparse
import time

import numpy as np

from fractal_spectra import _kernels as K
from fractal_spectra import divergence_builder as db
from fractal_spectra import weighted_cantor
from fractal_spectra.measure_eval import _model_arrays


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    m = weighted_cantor()
    qs = np.linspace(-20, 20, 20001)
    yield "pressure_roots (20k q)", (
        lambda: K.pressure_roots_py(m.log_p, m.log_r, qs),
        lambda: K.pressure_roots_jit(m.log_p, m.log_r, qs),
    )

    sched = db.schedule(m, (0.4, 0.6), 6, 50)
    n = 200_000
    freqs = sched.freqs()
    lengths = np.array([min(L, n) for L in sched.lengths], dtype=np.int64)
    yield f"fill_digits ({n} digits)", (
        lambda: K.fill_digits_py(freqs, lengths, n, 1e-12),
        lambda: K.fill_digits_jit(freqs, lengths, n, 1e-12),
    )

    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1, 2000)
    b = a + rng.uniform(0, 0.2, a.size)
    tol = np.full(a.size, 1e-9)
    args = (a, b, tol, *_model_arrays(m), 1000)
    yield "interval_masses (2000 intervals)", (
        lambda: K.interval_masses_py(*args),
        lambda: K.interval_masses_jit(*args),
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if K.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':36s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s}  agree")
    for name, (py, jit) in cases():
        t0 = time.perf_counter()
        jit()
        warm = time.perf_counter() - t0
        t_py, out_py = best_of(py, max(1, args.repeat // 2))
        t_jit, out_jit = best_of(jit, args.repeat)
        if isinstance(out_py, tuple):
            agree = all(np.allclose(u, v, rtol=1e-12, atol=1e-15) for u, v in zip(out_py, out_jit))
        else:
            agree = np.allclose(out_py, out_jit, rtol=0, atol=1e-12)
        print(f"{name:36s} {t_py:11.4f} {t_jit:11.4f} {t_py / t_jit:7.1f}x  {agree}  (first call {warm:.2f}s)")


if __name__ == "__main__":
    main()
