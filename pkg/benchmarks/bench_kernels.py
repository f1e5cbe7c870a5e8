"""Compiled vs numpy RK4 kernels: per-step time and agreement.

    python3 benchmarks/bench_kernels.py [--sizes 200,1000,5000] [--repeat 200]
"""

import argparse
import timeit

import numpy as np

from flrw_blowup.solver import get_kernels


def setup(npts, seed=0):
    rng = np.random.default_rng(seed)
    r = np.arange(npts) * 0.02
    u = np.exp(-r ** 2) + 1e-3 * rng.standard_normal(npts)
    v = 0.5 * np.exp(-r ** 2)
    return u, v, np.empty((6, npts))


def one_step(kern, npts, mode):
    u, v, work = setup(npts)
    kern.rk4_step(u, v, work, 1.5, 0.005, 0.02, npts - 1, 3, 0.5, 1.0, 1.5, mode)
    return u, v


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,1000,5000")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    try:
        compiled = get_kernels("cython")
    except ImportError:
        print("compiled kernels not built; run pip install -e . --no-build-isolation")
        return 1
    pure = get_kernels("numpy")
    print(f"{'npts':>7} {'mode':>5} {'cython us':>10} {'numpy us':>10} {'speedup':>8} {'max diff':>10}")
    for npts in (int(s) for s in args.sizes.split(",")):
        for mode in (0, 1, 2):
            a = one_step(compiled, npts, mode)
            b = one_step(pure, npts, mode)
            diff = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
            times = []
            for kern in (compiled, pure):
                u, v, work = setup(npts)
                f = lambda: kern.rk4_step(u, v, work, 1.5, 1e-9, 0.02, npts - 1, 3, 0.5, 1.0,
                                          1.5, mode)
                times.append(min(timeit.repeat(f, number=args.repeat, repeat=3)) / args.repeat)
            tc, tn = times
            print(f"{npts:7d} {mode:5d} {tc * 1e6:10.2f} {tn * 1e6:10.2f} {tn / tc:8.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
