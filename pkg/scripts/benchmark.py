#!/usr/bin/env python3
"""Benchmark the hot energy/gradient kernel: numba vs pure numpy.

Equivalent to `triode-lab bench`; kept as a script so the comparison can
run without installing the console entry point.
"""

import argparse
import time

import numpy as np

from triodelab.disk import DiskGrid, _kernel_args
from triodelab.kernels import numba_backend, numpy_backend
from triodelab.potential import PotentialSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=161)
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--iters", type=int, default=100)
    args = parser.parse_args()

    spec = PotentialSpec()
    grid = DiskGrid(args.grid)
    rng = np.random.default_rng(0)
    values = 0.5 * rng.standard_normal((grid.n, grid.n, 2))
    coeffs, bump = _kernel_args(spec)

    results = {}
    for name, backend in (("numpy", numpy_backend), ("numba", numba_backend)):
        if backend is None:
            print(f"{name:6s}: unavailable")
            continue
        backend.energy_and_grad(
            values, grid.cell_inside, grid.interior, grid.h, args.epsilon,
            coeffs, bump,
        )
        t0 = time.perf_counter()
        for _ in range(args.iters):
            e, g = backend.energy_and_grad(
                values, grid.cell_inside, grid.interior, grid.h, args.epsilon,
                coeffs, bump,
            )
        dt = (time.perf_counter() - t0) / args.iters
        results[name] = dt
        print(f"{name:6s}: {dt * 1e3:8.3f} ms/iter  (energy={e:.6f})")
    if len(results) == 2:
        print(f"numba speedup: {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
