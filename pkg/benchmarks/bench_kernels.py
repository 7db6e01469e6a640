"""Compiled kernels against the pure-numpy fallback.

Run ``python3 benchmarks/bench_kernels.py``.  The compiled timings are taken
in this process; the fallback timings in a child process started with
``NHGEO_DISABLE_NUMBA=1``, so nested kernel calls run uncompiled as well.
The first call of each kernel is excluded (warm-up).
"""
import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from nhgeo import _kernels as K
from nhgeo._accel import USE_NUMBA

RTOL, MAXITER = 1e-15, 64


def best_of(func, args, repeat):
    func(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    rng = np.random.default_rng(0)
    gs = (rng.uniform(0, 2, size) - 1j * rng.uniform(0, 0.9, size)).astype(complex)
    gs = gs[np.abs(np.abs(gs) - 1) > 1e-2]
    breaks = np.array([0.0, math.acos(0.5), math.pi])
    params = np.array([0.0, 1.0, 0.3 - 0.1j, 50.0], dtype=complex)
    y0 = np.array([0.3, 1.0, -0.2, 0.9], dtype=complex)
    return [
        ("carlson R_F", K.rf_kernel, (0.5 + 0.2j, 1 - 0.3j, 2 + 0.1j, RTOL, MAXITER)),
        (f"closed form x{gs.shape[0]}", K.overall_phase_closed_many, (gs, RTOL, MAXITER)),
        ("B4 quadrature", K.b4_quad_kernel, (0.5 - 0.3j, breaks, 1e-14, 1e-10, 2000)),
        ("adjoint pair, T=50", K.integrate_circle, (params, 50.0, y0, 1e-11, 0.01, 10**7)),
    ]


def timings(size, repeat):
    return {name: best_of(kern, kargs, repeat) for name, kern, kargs in cases(size)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000, help="number of g values in the batch case")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print raw timings of this process as JSON")
    args = ap.parse_args(argv)
    if args.json:
        print(json.dumps(timings(args.size, args.repeat)))
        return
    if not USE_NUMBA:
        sys.exit("numba is disabled in this process; unset NHGEO_DISABLE_NUMBA to compare")
    fast = timings(args.size, args.repeat)
    env = dict(os.environ, NHGEO_DISABLE_NUMBA="1")
    child = subprocess.run([sys.executable, __file__, "--json", "--size", str(args.size),
                            "--repeat", "1"], env=env, capture_output=True, text=True, check=True)
    slow = json.loads(child.stdout)
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}")
    for name, t in fast.items():
        print(f"{name:<24}{t:>12.3e}{slow[name]:>12.3e}{slow[name] / t:>10.1f}")


if __name__ == "__main__":
    main()
