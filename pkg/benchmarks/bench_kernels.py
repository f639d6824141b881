"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--samples N] [--R R]

Reports per-call times for series evaluation on a grid, certified winding
counts and Aberth root finding, and checks both backends give the same counts.
"""

import argparse
import time

import numpy as np

from gefzeros.gaussian_core import SeedLineage, VarianceProfile, sample_coefficients
from gefzeros.kernels import get_backend
from gefzeros.series import truncation_order
from gefzeros.zeros import count_zeros_roots, count_zeros_winding


def _time(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--R", type=float, default=4.0)
    args = ap.parse_args(argv)
    K = truncation_order(args.R)
    lin = SeedLineage(2024)
    samples = [sample_coefficients(VarianceProfile.constant(), K, lin.child(i))
               for i in range(args.samples)]
    z = args.R * np.exp(2j * np.pi * np.arange(4096) / 4096)
    backends = {}
    for name in ("pure", "cython"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"{name}: not available")
    counts = {}
    print(f"R={args.R:g} K={K} samples={args.samples}")
    for name, mod in backends.items():
        c = samples[0].coefficients
        t_eval, _ = _time(lambda: mod.series_eval(c, z, 0.0))
        t_wind, cw = _time(lambda: [count_zeros_winding(s, args.R, backend=mod).count
                                    for s in samples], repeat=1)
        t_root, cr = _time(lambda: [count_zeros_roots(s, args.R, backend=mod).count
                                    for s in samples[:10]], repeat=1)
        counts[name] = (cw, cr)
        print(f"{name:7s} eval 4096 pts {t_eval * 1e3:8.2f} ms | "
              f"winding {t_wind / len(samples) * 1e3:8.2f} ms/sample | "
              f"roots {t_root / 10 * 1e3:8.2f} ms/sample")
    if len(counts) == 2:
        same = counts["pure"] == counts["cython"]
        print("backends agree on counts:", same)


if __name__ == "__main__":
    main()
