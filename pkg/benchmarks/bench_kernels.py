"""Compare the compiled and numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``.  Reports the best of
several repeats and the maximum difference between backends.
"""
import argparse
import timeit

import numpy as np

from bathyscatter import kernels
from bathyscatter.forward import kernel_table
from bathyscatter.grid import Grid


def bench(fn, arg, repeat):
    return min(timeit.repeat(lambda: fn(arg), number=1, repeat=repeat))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=200_000)
    p.add_argument("--n", type=int, default=32, help="grid side for dense assembly")
    p.add_argument("--repeat", type=int, default=5)
    a = p.parse_args()

    backends = kernels.backends()
    x = np.geomspace(1e-6, 1e3, a.points)
    table = kernel_table(Grid(a.n, a.n), 0.267)
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    ref = {}
    for name, mod in backends.items():
        th = bench(mod.hankel1_0, x, a.repeat)
        td = bench(mod.dense_from_table, table, a.repeat)
        ref[name] = (mod.hankel1_0(x), mod.dense_from_table(table))
        print(f"{name:>7}: hankel1_0 {a.points} pts {th * 1e3:8.2f} ms | "
              f"dense {a.n ** 2}x{a.n ** 2} {td * 1e3:8.2f} ms")
    if len(ref) == 2:
        (h1, d1), (h2, d2) = ref.values()
        print(f"max rel diff hankel: {np.max(np.abs(h1 - h2) / np.abs(h2)):.2e}; "
              f"dense identical: {np.array_equal(d1, d2)}")


if __name__ == "__main__":
    main()
