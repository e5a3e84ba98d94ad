"""Time the compiled and pure-numpy kernel backends side by side.

Usage: python benchmarks/bench_kernels.py [--n 16] [--repeat 5]

Each kernel runs on random inputs of a d = 3, n_co = 3 grid; the last rows
time a full residual evaluation and a full penalty gradient, which is what
the minimizer calls per step.
"""

import argparse
import timeit

import numpy as np

from gcrlab import kernels
from gcrlab.gcr import ImmersionFields, residuals
from gcrlab.geometry import geometry_from_spec
from gcrlab.grid import build_grid
from gcrlab.metric import MetricSpec
from gcrlab.minimizer import gradient, random_fields


def kernel_cases(n, rng):
    shape = (n, n, n)
    h = rng.standard_normal((3, 3, 3) + shape)
    h = 0.5 * (h + h.swapaxes(1, 2))
    k = rng.standard_normal((3, 3, 3) + shape)
    gam = rng.standard_normal((3, 3, 3) + shape)
    ginv = rng.standard_normal((3, 3) + shape)
    s4 = rng.standard_normal((3, 3, 3, 3) + shape)
    return {
        "central_diff": lambda b: b.central_diff(h, 4, 0.1),
        "gauss_quadratic": lambda b: b.gauss_quadratic(h),
        "codazzi_algebra": lambda b: b.codazzi_algebra(h, k, gam),
        "ricci_algebra": lambda b: b.ricci_algebra(h, k, ginv),
        "gauss_adjoint": lambda b: b.gauss_adjoint(s4, h),
        "codazzi_adjoint": lambda b: b.codazzi_adjoint(s4, h, k, gam),
        "ricci_adjoint": lambda b: b.ricci_adjoint(s4, h, k, ginv),
        "power_density": lambda b: b.power_density(h, 3, 4.0),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=16, help="nodes per axis")
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (best is reported)")
    args = parser.parse_args(argv)

    names = kernels.available_backends()
    if "compiled" not in names:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    rows = []
    for name, case in kernel_cases(args.n, rng).items():
        rows.append((name, {b: best(lambda: case(kernels.get_backend(b)), args.repeat) for b in names}))

    grid = build_grid(3, 2 * np.pi, args.n)
    geom = geometry_from_spec(grid, MetricSpec("diag-of-revolution", {"R": 2.0, "r": 1.0}))
    fields = random_fields(grid, 3, 0.1, seed=0)
    previous = kernels.backend_name()
    end_to_end = {"residuals": lambda: residuals(fields, geom).norms,
                  "penalty_gradient": lambda: gradient(fields, geom, 4.0, 1.0)}
    for label, fn in end_to_end.items():
        times = {}
        for b in names:
            kernels.use_backend(b)
            times[b] = best(fn, args.repeat)
        rows.append((label, times))
    kernels.use_backend(previous)

    header = f"{'kernel':<18}" + "".join(f"{b + ' [ms]':>16}" for b in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(f"grid {args.n}^3, best of {args.repeat}")
    print(header)
    for label, times in rows:
        line = f"{label:<18}" + "".join(f"{1e3 * times[b]:>16.3f}" for b in names)
        if len(names) > 1:
            line += f"{times['python'] / times['compiled']:>10.2f}"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
