"""Compare the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once per backend before timing so numba's compile (or
cache load) cost is excluded.  Agreement between the two paths is printed
alongside the timings.
"""

import argparse
import time

import numpy as np

from cmclab import _kernels
from cmclab.delaunay import critical_catenoid
from cmclab.jacobi import catenoid_problem


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    cc = critical_catenoid()
    prob = catenoid_problem(cc.c, cc.s_star, 3)
    n = 4000
    fine = np.linspace(prob.a, prob.b, 2 * n + 1)
    x, q = prob.x(fine), prob.potential(fine)
    h = (prob.b - prob.a) / n
    yield "rk4 shooting (n=4000)", lambda nb: _kernels.rk4_sturm_liouville(
        h, x, q, 1.0, -x[0], use_numba=nb)

    xs = np.linspace(-3, 3, 601)
    vals = np.sin(xs)
    zs = np.linspace(0, 0.5, 41)
    yield "extension d=1 (601 x 41)", lambda nb: _kernels.whitney_1d(
        vals, xs[0], xs[1] - xs[0], xs, zs, use_numba=nb)

    g = np.linspace(-1, 1, 61)
    v2 = np.sin(g)[:, None] * np.cos(g)[None, :]
    z2 = np.linspace(0, 0.3, 11)
    yield "extension d=2 (61^2 x 11)", lambda nb: _kernels.whitney_2d(
        v2, g[0], g[0], g[1] - g[0], g[1] - g[0], g, g, z2, use_numba=nb)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        print("numba is not importable; only the numpy path can run")
    print(f"{'kernel':32s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speedup':>9s} {'max diff':>10s}")
    for name, fn in cases():
        fn(False)
        t_np, out_np = _best(lambda: fn(False), args.repeat)
        if _kernels.HAS_NUMBA:
            fn(True)
            t_nb, out_nb = _best(lambda: fn(True), args.repeat)
            a = out_nb if isinstance(out_nb, tuple) else (out_nb,)
            b = out_np if isinstance(out_np, tuple) else (out_np,)
            diff = max(float(np.max(np.abs(u - v))) for u, v in zip(a, b))
            print(f"{name:32s} {t_nb:12.5f} {t_np:12.5f} {t_np / t_nb:9.1f} {diff:10.2e}")
        else:
            print(f"{name:32s} {'-':>12s} {t_np:12.5f} {'-':>9s} {'-':>10s}")


if __name__ == "__main__":
    main()
