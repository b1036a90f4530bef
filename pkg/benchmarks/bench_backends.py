"""Compare the numba kernels, the numpy fallback and the scalar reference engine.

    python benchmarks/bench_backends.py [--size 64] [--repeat 5] [--workers 1]

Each configuration is warmed once, then timed over ``--repeat`` runs; the
best time is reported along with the max abs difference from the scalar
engine on the default-size grid.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from wban_exposure.geometry import GridSpec, NodePosition
from wban_exposure.kernels import ENV_VAR, HAVE_NUMBA
from wban_exposure.sweep import SweepKind, SweepScenario, run_sweep


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scenario(size):
    grid = GridSpec(length_cm=size, width_cm=size)
    fixed = {"tx": NodePosition(1, 1), "rx": NodePosition(size - 1, size - 1)}
    return SweepScenario(SweepKind.RELAY, fixed, grid=grid, protocol_enabled=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="grid edge in cells")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    big = scenario(args.size)
    small = SweepScenario(SweepKind.RELAY)
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    reference = run_sweep(small, engine="scalar").pd.values
    ncells = args.size * args.size - 2

    print(f"relay sweep, {ncells} cells, protocol on, workers={args.workers}")
    for name in backends:
        os.environ[ENV_VAR] = name
        t = best_time(lambda: run_sweep(big, workers=args.workers), args.repeat)
        diff = np.nanmax(np.abs(run_sweep(small).pd.values - reference))
        print(f"  {name:<7} {t * 1e3:10.2f} ms   max|diff vs scalar|={diff:.2e}")
    t = best_time(lambda: run_sweep(big, engine="scalar"), 1)
    print(f"  {'scalar':<7} {t * 1e3:10.2f} ms")


if __name__ == "__main__":
    main()
