"""Compare the compiled kernels with the numpy fallback.

Times ``combine`` (one group-law step) and a full fixed-point solve for a
range of sizes, with the compiled backend forced on at every size. The
crossover where numpy's BLAS/LAPACK overtakes the per-element loops sets
``nmesolve._backend.CUTOVER_N``.

Usage::

    python3 benchmarks/bench_backends.py [--sizes 1,2,4,...] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from nmesolve import _backend, _pykernels
from nmesolve.probgen import GenSpec, gen_solvable
from nmesolve.solvers import solve
from nmesolve.transform import initial_triple


def _time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def run(sizes, repeat):
    if not _backend.HAVE_COMPILED:
        raise SystemExit("compiled kernels are not built")
    compiled = _backend._compiled
    saved = _backend.CUTOVER_N
    _backend.CUTOVER_N = 10**9
    print(f"{'n':>5} {'combine_c[us]':>14} {'combine_py[us]':>15} {'ratio':>6} "
          f"{'solve_c[ms]':>12} {'solve_py[ms]':>13} {'ratio':>6}")
    try:
        for n in sizes:
            p = gen_solvable(GenSpec(n=n, seed=n, margin=0.5)).problem
            t = initial_triple(p)
            args = (t.A, t.B, t.Q, t.A, t.B, t.Q, 1e-12)
            cc = _time(lambda: compiled.combine(*args), repeat)
            cp = _time(lambda: _pykernels.combine(*args), repeat)
            times = {}
            for name in ("compiled", "python"):
                with _backend.use_backend(name):
                    times[name] = _time(lambda: solve(p, algorithm="fixed_point"), repeat)
            sc, sp = times["compiled"], times["python"]
            print(f"{n:5d} {cc * 1e6:14.1f} {cp * 1e6:15.1f} {cp / cc:6.2f} "
                  f"{sc * 1e3:12.2f} {sp * 1e3:13.2f} {sp / sc:6.2f}")
    finally:
        _backend.CUTOVER_N = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1,2,4,8,16,32,48,64,96,128")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    np.random.seed(0)
    run([int(s) for s in args.sizes.split(",")], args.repeat)


if __name__ == "__main__":
    main()
