"""Compare the compiled and numpy RK4 kernels on Riccati and closed-loop solves.

    python benchmarks/bench_kernels.py [--sizes 2 4 8 16] [--steps 20000] [--repeat 3]

Prints one line per (kernel, n) with the best wall time of each backend, the
speedup, and the largest difference between the two results.
"""

import argparse
import time

import numpy as np

from glqlab import kernels
from glqlab.randsys import random_glq


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n, steps, repeat, dt=1e-3):
    pr = random_glq(np.random.default_rng(n), n, max(1, n // 2), max(1, n // 2))
    rows = []
    results = {}
    for name in kernels.BACKENDS:
        kernels.set_backend(name)
        t_dre, (P, dP, _, _) = _best(lambda: kernels.dre_rk4(pr.A, pr.S, pr.Q, dt, steps), repeat)
        h = np.zeros((steps + 1, n))
        y0 = np.ones(n)
        t_ltv, (Y, _, _) = _best(
            lambda: kernels.ltv_rk4(pr.A, pr.S, np.eye(n), P[::-1], -dP[::-1], h, h, y0, dt), repeat
        )
        results[name] = (t_dre, t_ltv, P, Y)
    kernels.set_backend(kernels.BACKENDS[0])
    if len(results) == 2:
        c, p = results["cython"], results["python"]
        for label, i, j in (("dre_rk4", 0, 2), ("ltv_rk4", 1, 3)):
            diff = float(np.max(np.abs(c[j] - p[j])))
            rows.append(f"{label:8s} n={n:3d}  cython {c[i]:9.4f}s  python {p[i]:9.4f}s  speedup {p[i] / c[i]:7.1f}x  max|diff| {diff:.2e}")
    else:
        p = results["python"]
        rows.append(f"dre_rk4  n={n:3d}  python {p[0]:9.4f}s  (compiled kernels not built)")
        rows.append(f"ltv_rk4  n={n:3d}  python {p[1]:9.4f}s")
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16])
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    print(f"backends: {', '.join(kernels.BACKENDS)}; {args.steps} RK4 steps")
    for n in args.sizes:
        for row in bench(n, args.steps, args.repeat):
            print(row)


if __name__ == "__main__":
    main()
