"""Time the compiled kernels against the numpy/scipy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from rgflow.kernels import backends


def cases(rng):
    n = 4096
    u = rng.uniform(-0.5, 0.5, n)
    w = np.linspace(-160, 160, n)
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.linspace(-40, 40, 8193)
    u0 = 0.05 * np.exp(-x ** 2 / 2)
    steps = 2000
    times = np.linspace(1.0, 2.0, steps + 1)
    mid = 0.5 * (times[1:] + times[:-1])
    g = -np.ones(steps)
    return {
        "series_eval (N=4096, 3 terms)": lambda k: k.series_eval(u, [3, 5, 1.5], [1.0, 0.2, -0.1]),
        "weighted_sup (N=4096)": lambda k: k.weighted_sup(w, c, d, 2.0),
        "cn_imex_run (8193 nodes, 2000 steps)": lambda k: k.cn_imex_run(u0, x[1] - x[0], times, mid, g, g,
                                                                         [3.0], [1.0], 1.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    found = backends()
    names = sorted(found)
    print(f"backends: {', '.join(names)}")
    rng = np.random.default_rng(0)
    for label, fn in cases(rng).items():
        best = {}
        for name in names:
            k = found[name]
            fn(k)  # warm up
            number = 1 if "cn_imex" in label else 50
            best[name] = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat)) / number
        cols = "  ".join(f"{n}: {best[n] * 1e3:9.3f} ms" for n in names)
        speed = f"  speedup {best['python'] / best['cython']:.1f}x" if "cython" in best else ""
        print(f"{label:40s} {cols}{speed}")


if __name__ == "__main__":
    main()
