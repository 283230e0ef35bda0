"""Compiled vs numpy kernels.

    python3 benchmarks/bench_kernels.py [--sizes 128 256 512] [--repeat 5]

Reports the best wall time per call for each kernel and backend, plus one
RK4 shallow-water step, and checks that both backends agree bitwise.
"""
import argparse
import timeit

import numpy as np

from thinfilm import charts, kernels
from thinfilm.grid import Grid
from thinfilm.shallow_water import ShallowWaterProblem, ShallowWaterState, step


def _best(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=n, repeat=repeat)) / n


def _cases(n):
    rng = np.random.default_rng(0)
    f = rng.standard_normal((n, n))
    K = [1 + 0.1 * rng.random((n, n)) for _ in range(3)]
    d = 1.0 / n
    g = Grid(n, n, ((-1, 1), (-1, 1)), (False, True))
    X1, X2 = g.mesh()
    pr = ShallowWaterProblem(charts.Paraboloid(), g, nu=0.01, CR=0.05, s0=-1)
    st = pr.initialize(ShallowWaterState(0.0, 1 + 0.1 * np.sin(np.pi * X1), 0.2 + 0 * X1,
                                         0.1 * np.cos(np.pi * X2)))
    pr.geometry(0.0)     # warm the geometry cache
    return {
        "derivatives": lambda b: b.derivatives(f, d, d, False, True),
        "first_derivative": lambda b: b.first_derivative(f, d, False, 0),
        "reynolds_coo": lambda b: b.reynolds_coo(*K, d, d, False, True),
        "rk4_step": lambda b: _with_backend(b, lambda: step(st, pr, 1e-5, check_cfl=False)),
    }


def _with_backend(b, fn):
    old = kernels.backend
    kernels.backend = b
    try:
        return fn()
    finally:
        kernels.backend = old


def _same(a, b):
    if isinstance(a, ShallowWaterState):
        return all(np.array_equal(x, y) for x, y in zip(a.arrays(), b.arrays()))
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled kernels not built; only the numpy backend is available")
        return 1
    cy, py = kernels.get_backend("cython"), kernels.get_backend("python")
    print(f"threads={kernels.num_threads()}")
    print(f"{'kernel':<18}{'n':>6}{'cython [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}  equal")
    for n in args.sizes:
        for name, fn in _cases(n).items():
            tc = _best(lambda: fn(cy), args.repeat)
            tp = _best(lambda: fn(py), args.repeat)
            eq = _same(fn(cy), fn(py))
            print(f"{name:<18}{n:>6}{1e3 * tc:>14.3f}{1e3 * tp:>14.3f}{tp / tc:>10.2f}  {eq}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
