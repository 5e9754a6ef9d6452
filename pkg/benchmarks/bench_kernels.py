#!/usr/bin/env python3
"""Timing comparison of the numba-compiled kernels against the numpy twins.

Covers the two hot paths: the two-port pattern synthesis over the full
(frequency x angle) grid and the CGS solve of the normal equations.  The
numba path is warmed up first so compile time is excluded.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

from fdaoa import (ExperimentConfig, build_apertures, build_sensing_matrix,
                   numba_available, pattern_sweep)
from fdaoa.config import angle_grid, frequency_grid
from fdaoa.estimator import gram_matrix
from fdaoa import _kernels


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions; the best run is reported")
    args = parser.parse_args()

    cfg = ExperimentConfig()
    ap1, ap2 = build_apertures(cfg)
    freqs = frequency_grid(cfg)
    angles = angle_grid(cfg)

    backends = ["numpy"]
    if numba_available():
        backends.insert(0, "numba")
        # trigger compilation outside the timed region
        pattern_sweep(ap1, angles, freqs, cfg.ref_distance_m, backend="numba")
    else:
        print("numba not importable; timing the numpy path only")

    print(f"pattern synthesis grid: {freqs.count} frequencies x "
          f"{angles.count} angles x {len(ap1.elements)} elements, 2 ports")
    sweep_times = {}
    for backend in backends:
        def run(b=backend):
            pattern_sweep(ap1, angles, freqs, cfg.ref_distance_m, backend=b)
            pattern_sweep(ap2, angles, freqs, cfg.ref_distance_m, backend=b)

        sweep_times[backend] = time_call(run, args.repeats)

    p1 = pattern_sweep(ap1, angles, freqs, cfg.ref_distance_m)
    p2 = pattern_sweep(ap2, angles, freqs, cfg.ref_distance_m)
    h = build_sensing_matrix(p1, p2, freqs, angles, cfg.ref_distance_m)
    a = gram_matrix(h)
    b = h.entries.conj().T @ h.entries[:, 31]
    if "numba" in backends:
        _kernels.cgs(a, b, 1e-6, 5, backend="numba")

    print(f"cgs solve: {a.shape[0]}x{a.shape[1]} normal equations, "
          f"720 iteration cap, tol 1e-8 (forced full depth)")
    cgs_times = {}
    for backend in backends:
        def run(bk=backend):
            _kernels.cgs(a, b, 1e-8, 720, backend=bk)

        cgs_times[backend] = time_call(run, args.repeats)

    print()
    print(f"{'kernel':<22}{'backend':<10}{'best time':>12}{'speedup':>10}")
    for name, times in (("pattern synthesis", sweep_times),
                        ("cgs solve", cgs_times)):
        ref = times["numpy"]
        for backend in backends:
            speed = ref / times[backend]
            print(f"{name:<22}{backend:<10}{times[backend] * 1e3:>10.2f}ms"
                  f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
