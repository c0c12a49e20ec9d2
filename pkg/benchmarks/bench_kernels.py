"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat K]

Each row reports the best of K runs per backend, the speed-up, and the
largest disagreement between the two backends.
"""
import argparse
import math
import timeit

import numpy as np

from radial_gate import kernels


def bessel_case(fn, n, xs):
    return lambda which: fn(n, xs, which=which)


def integrate_case(m, energy, r_max):
    # free 2D radial equation in t = ln r, started on R = r^m near the origin
    r0 = 1e-6 * r_max
    args = (0.0, float(m * m), 2.0, energy, 2.0, math.log(r0), math.log(r_max), r0 ** m, m * r0 ** m)
    sample_t = np.log(np.linspace(r_max / 100, r_max, 100))

    def run(which):
        y_end, _, samples, _, _ = kernels.integrate(*args, sample_t=sample_t, which=which)
        return np.concatenate([y_end, samples.ravel()])
    return run


def best(run, which, repeat):
    return min(timeit.repeat(lambda: run(which), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20_000, help="points per Bessel array")
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args(argv)

    if "cython" not in kernels.available():
        print("compiled kernel not built; only the Python backend is available")
        return 1

    xs = np.linspace(1e-3, 60.0, opts.size)
    cases = [
        (f"J0 x{opts.size}", bessel_case(kernels.jn_array, 0, xs)),
        (f"J5 x{opts.size}", bessel_case(kernels.jn_array, 5, xs)),
        (f"Y0 x{opts.size}", bessel_case(kernels.yn_array, 0, xs)),
        (f"Y3 x{opts.size}", bessel_case(kernels.yn_array, 3, xs)),
        ("integrate m=0 r<=30", integrate_case(0, 1.0, 30.0)),
        ("integrate m=3 r<=30", integrate_case(3, 1.0, 30.0)),
    ]
    print(f"{'case':<22}{'cython s':>12}{'python s':>12}{'speed-up':>10}{'max rel diff':>14}")
    for name, run in cases:
        a, b = run("cython"), run("python")
        diff = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
        tc, tp = best(run, "cython", opts.repeat), best(run, "python", opts.repeat)
        print(f"{name:<22}{tc:>12.5f}{tp:>12.5f}{tp / tc:>9.1f}x{diff:>14.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
