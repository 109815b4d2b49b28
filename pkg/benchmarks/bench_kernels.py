"""Timing harness for the numerical kernels.

Compares the dispatch path selected at import time (numba-jitted when
available) against each kernel's ``py_func`` attribute. Two caveats make
the comparison honest rather than flattering:

* with numba active, ``py_func`` of a driver kernel still calls the
  *jitted* inner helpers (they are module-level dispatchers), so the
  second column measures "plain-Python loop over compiled helpers";
* for a fully interpreted baseline, rerun this script with
  ``WMLAB_NO_NUMBA=1`` -- then both columns are pure Python and should
  agree.

Usage::

    python3 benchmarks/bench_kernels.py [--n 400 800] [--repeats 5]
"""

import argparse
import time

import numpy as np

from wmlab import _kernels
from wmlab._accel import HAVE_NUMBA, NUMBA_DISABLED
from wmlab.fem1d import DIRICHLET, build_basis, _element_quadrature


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(n, repeats):
    basis = build_basis(n, 1, DIRICHLET)
    qpts, qwts = _element_quadrature(basis, 3)
    ones = np.ones((1,) + qpts.shape)
    d = np.zeros(1, dtype=np.int64)
    xs = np.linspace(0.0, 1.0, 5 * n)

    cases = [
        (
            "assemble_bilinear",
            _kernels.assemble_bilinear,
            (basis.knots, basis.order, basis.n_raw, qpts, qwts, ones, d, d),
        ),
        (
            "sine_rows",
            _kernels.sine_rows,
            (basis.knots, basis.order, basis.n_raw, qpts, qwts, n // 2),
        ),
        (
            "eval_basis_many",
            _kernels.eval_basis_many,
            (basis.knots, basis.order, xs, 1),
        ),
    ]

    rows = []
    for name, fn, args in cases:
        fn(*args)  # warm-up (jit compilation, caches)
        t_disp = _time(fn, args, repeats)
        t_py = _time(fn.py_func, args, repeats)
        rows.append((name, n, t_disp, t_py))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[400, 800])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    mode = "numba" if (HAVE_NUMBA and not NUMBA_DISABLED) else "pure python"
    print(f"dispatch mode: {mode}")
    print(f"{'kernel':<20} {'n':>6} {'dispatch (s)':>14} {'py_func (s)':>14} {'speedup':>9}")
    for n in args.n:
        for name, size, t_disp, t_py in bench_case(n, args.repeats):
            ratio = t_py / t_disp if t_disp > 0 else float("inf")
            print(f"{name:<20} {size:>6} {t_disp:>14.6f} {t_py:>14.6f} {ratio:>8.1f}x")


if __name__ == "__main__":
    main()
