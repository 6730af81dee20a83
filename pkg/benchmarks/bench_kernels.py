"""Compiled kernels versus their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 20 80 160] [--repeat 5]

Both paths run in one process: the numpy side calls the uncompiled Python
body of each jitted kernel, or its vectorized twin where one exists.
Compilation happens once, before timing.
"""

import argparse
import timeit

import numpy as np

from epcluster import _kernels as K
from epcluster._accel import USE_NUMBA, python_impl
from epcluster.lattice import LatticeSpec, build_hamiltonian


def schur_pipeline(hessenberg, schur_hessenberg, triangular_eigvecs):
    def run(h):
        hh, q = hessenberg(h.copy())
        if schur_hessenberg(hh, q, 1e-10, 30 * h.shape[0]) < 0:
            raise RuntimeError("QR did not converge")
        return q @ triangular_eigvecs(hh)
    return run


def best_of(func, arg, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: func(arg), number=1), 1e-6)))
    return min(timeit.repeat(lambda: func(arg), number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[20, 80, 160])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not USE_NUMBA:
        print("numba backend inactive (EPCLUSTER_DISABLE_NUMBA set or numba missing); both columns run numpy")

    rng = np.random.default_rng(args.seed)
    compiled = schur_pipeline(K.hessenberg, K.schur_hessenberg, K.triangular_eigvecs)
    fallback = schur_pipeline(python_impl(K.hessenberg), python_impl(K.schur_hessenberg),
                              python_impl(K.triangular_eigvecs))

    print(f"{'kernel':<12}{'N':>6}{'numba [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        spec = LatticeSpec(n, rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), rng.uniform(-0.5, 0.5, n), "ring")
        h = build_hamiltonian(spec)
        states = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        points = rng.random((n * 10, 3))
        init = points[rng.choice(points.shape[0], 6, replace=False)].copy()
        cases = [
            ("eig", compiled, fallback, h),
            ("fidelity", K.fidelity_matrix_loops, K.fidelity_matrix_numpy, states),
            ("lloyd", lambda x: K.lloyd_loops(x, init.copy(), 300, 1e-9),
             lambda x: K.lloyd_numpy(x, init.copy(), 300, 1e-9), points),
        ]
        for name, fast, slow, arg in cases:
            fast(arg)
            t_fast = best_of(fast, arg, args.repeat)
            t_slow = best_of(slow, arg, args.repeat)
            print(f"{name:<12}{n:>6}{t_fast * 1e3:>14.3f}{t_slow * 1e3:>14.3f}{t_slow / t_fast:>10.1f}")


if __name__ == "__main__":
    main()
