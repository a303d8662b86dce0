"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from rmbounds.kernels import available_backends


def _cases(rng):
    x = rng.uniform(0, 1e4, 100_000)
    src = rng.uniform(0, 1e4, 8)
    d2 = rng.uniform(1, 1e4, 8)
    alpha = rng.uniform(1, 200, 8)
    y = rng.uniform(0, 1e4, 100_000)
    src_y = rng.uniform(0, 1e4, 8)
    t = rng.uniform(-5e4, 6e4, 20_000)
    xn = np.arange(-50, 61) * 1000.0
    vn = rng.uniform(0, 1, len(xn))
    tx = np.column_stack([rng.uniform(0, 47, (5, 2)), np.full(5, 20.0)])
    rx = rng.uniform(0, 47, (2_000, 2))
    boxes = np.array([[x0, y0, x0 + 8, y0 + 8, 10.0] for x0 in (4, 20, 36) for y0 in (4, 20, 36)])
    return {
        "power_1d": lambda k: k.power_1d(x, src, d2, alpha, 2.0),
        "power_1d gamma=3": lambda k: k.power_1d(x, src, d2, alpha, 3.0),
        "dpower_1d": lambda k: k.dpower_1d(x, src, d2, alpha),
        "power_2d": lambda k: k.power_2d(x, y, src, src_y, d2, alpha, 2.0),
        "sinc_series": lambda k: k.sinc_series(t, xn, vn, 1000.0),
        "blockage_counts": lambda k: k.blockage_counts(tx, rx, 2.0, boxes),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = available_backends()
    cases = _cases(np.random.default_rng(0))
    names = list(backends)
    print(f"{'kernel':<20}" + "".join(f"{n + ' [ms]':>16}" for n in names) + (f"{'speedup':>10}" if len(names) > 1 else ""))
    for label, fn in cases.items():
        times = {}
        for name, mod in backends.items():
            fn(mod)
            times[name] = 1e3 * min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        line = f"{label:<20}" + "".join(f"{times[n]:>16.3f}" for n in names)
        if "cython" in times:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
