"""Timing comparison of the tridiagonal eigensolver backends.

Builds representative radial systems (Gaussian density on the unit disk)
and times the k-smallest eigenpair solve through the numba kernels and
through LAPACK.  Run:

    python3 benchmarks/bench_tridiag.py [--sizes 1000,4000,16000] [--k 10]
"""

import argparse
import time

import numpy as np

from spectra.density import make_density
from spectra.geometry import make_profile
from spectra.kernels import numba_available, tridiag_eigh_smallest
from spectra.radial import assemble_radial, make_radial_grid


def build_system(m):
    profile = make_profile("flat_ball", R=1.0, n=2)
    density = make_density("gaussian", {"j": 8.0}, profile)
    grid = make_radial_grid(profile, density, 2, m)
    system = assemble_radial(profile, density, 2, 1, grid)
    s = 1.0 / np.sqrt(system.mass)
    return system.diag * s * s, system.offdiag * s[:-1] * s[1:]


def timed(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,4000,16000")
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = ["numpy"]
    if numba_available():
        backends.insert(0, "numba")
        # trigger compilation outside the timed region
        d, e = build_system(64)
        tridiag_eigh_smallest(d, e, 4, backend="numba")
    else:
        print("numba not importable; timing the numpy path only")

    print(f"{'m':>8} {'k':>4} " + " ".join(f"{b:>12}" for b in backends))
    for m in sizes:
        d, e = build_system(m)
        times = {}
        results = {}
        for b in backends:
            times[b], results[b] = timed(
                lambda b=b: tridiag_eigh_smallest(d, e, args.k, backend=b),
                repeats=args.repeats)
        row = f"{m:>8} {args.k:>4} " + " ".join(
            f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            dev = float(np.max(np.abs(results["numba"][0] - results["numpy"][0])))
            row += f"   max|dw|={dev:.2e}"
        print(row)


if __name__ == "__main__":
    main()
