"""Numba kernels against their pure-numpy twins.

    python benchmarks/bench_kernels.py [--N 128] [--repeat 5]

Times interpolation, one RK4 sample interval over the full grid and at 64
probe points, and Newton inversion, then a whole flow integration run in a
subprocess with HOFERLIKE_NUMBA=0 and =1.  Best of ``--repeat`` runs; the
first numba call (compilation) is excluded.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from hoferlike import _kernels as K
from hoferlike.torus import displacement_gradient

FLOW = """
import time, numpy as np
from hoferlike.isotopy import GeneratorPath, integrate_generator
from hoferlike.torus import TorusGrid
g = TorusGrid({N})
gen = GeneratorPath.from_functions(g, 64, U=lambda t, x, y: 0.3 * np.cos(2 * np.pi * y) * (1 + t))
integrate_generator(GeneratorPath.from_functions(g, 16, U=lambda t, x, y: 0.01 * np.cos(2 * np.pi * x)))
t0 = time.perf_counter()
integrate_generator(gen)
print(time.perf_counter() - t0)
"""


def best(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def cases(N):
    rng = np.random.default_rng(0)
    X, Y = np.meshgrid(np.arange(N) / N, np.arange(N) / N, indexing="ij")
    C0 = K.spline_coefficients(0.05 * rng.normal(size=(2, N, N)), 3)
    C1 = K.spline_coefficients(0.05 * rng.normal(size=(2, N, N)), 3)
    px, py = X.ravel().copy(), Y.ravel().copy()
    probes = rng.random(64), rng.random(64)
    D = np.stack([0.05 * np.sin(2 * np.pi * Y), 0.05 * np.cos(2 * np.pi * X)])
    DC = K.spline_coefficients(D, 3)
    JC = K.spline_coefficients(displacement_gradient(D), 3)
    return {
        "interp (grid)": lambda f: f["interp"](C0, px, py, 3),
        "rk4 interval (grid)": lambda f: f["rk4"](C0, C1, px, py, 1 / 64, 4, 3),
        "rk4 interval (64 probes)": lambda f: f["rk4"](C0, C1, *probes, 1 / 64, 4, 3),
        "newton inverse (grid)": lambda f: f["newton"](DC, JC, px, py, px.copy(), py.copy(), 1e-12, 50, 3),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    twins = {
        "numpy": {"interp": K.interp_numpy, "rk4": K.rk4_interval_numpy, "newton": K.newton_invert_numpy},
    }
    if K.HAVE_NUMBA:
        twins["numba"] = {"interp": K.interp_numba, "rk4": K.rk4_interval_numba,
                          "newton": K.newton_invert_numba}
    print(f"N = {args.N}, best of {args.repeat}")
    print(f"{'kernel':<28}" + "".join(f"{k:>12}" for k in twins) + f"{'speedup':>10}")
    for name, call in cases(args.N).items():
        row = {}
        for k, f in twins.items():
            call(f)
            row[k] = best(lambda: call(f), args.repeat)
        sp = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        print(f"{name:<28}" + "".join(f"{row[k] * 1e3:>10.2f}ms" for k in twins) + f"{sp:>9.1f}x")
    flow = {}
    for flag in ("0", "1"):
        env = {**os.environ, "HOFERLIKE_NUMBA": flag}
        res = subprocess.run([sys.executable, "-c", FLOW.format(N=args.N)], env=env,
                             capture_output=True, text=True, check=True)
        flow[flag] = float(res.stdout.strip())
    print(f"{'integrate_generator T=64':<28}{flow['0'] * 1e3:>10.1f}ms{flow['1'] * 1e3:>10.1f}ms"
          f"{flow['0'] / flow['1']:>9.1f}x")


if __name__ == "__main__":
    main()
