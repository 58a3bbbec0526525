"""Compare the numba and numpy grid kernels on a few cycle systems.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends run every integer point of the source box; the script checks
that they agree and prints the best wall time of each.  Setting OHARA_JIT=0
makes the library pick numpy by default, this script always runs both.
"""

import argparse
import time

import numpy as np

from ohara.cycles import CycleSystem
from ohara.kernels import HAVE_NUMBA, grid_run

SYSTEMS = [
    ("R(4,5,3)->(5,3,4)", CycleSystem((3, 4, 5), (4, 5, 3), (5, 3, 4))),
    ("R(31,47,23) from sides", CycleSystem.from_sides((31, 47, 23), (47, 23, 31))),
    ("R(12,18,10,7)", CycleSystem.from_sides((12, 18, 10, 7), (18, 10, 7, 12))),
    ("R(120,90)->(90,120)", CycleSystem.from_sides((120, 90), (90, 120))),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    # compile once outside the timings
    grid_run(SYSTEMS[0][1], backend="numba")
    grid_run(SYSTEMS[0][1], method="fixed_point", backend="numba")

    print(f"{'system':<26}{'points':>9}{'method':>13}{'numba ms':>11}{'numpy ms':>11}{'speedup':>9}")
    for name, sys in SYSTEMS:
        for method in ("step", "fixed_point"):
            tn, (_, Sn, Kn) = best_of(lambda: grid_run(sys, method=method, backend="numba"), args.repeat)
            tp, (T, Sp, Kp) = best_of(lambda: grid_run(sys, method=method, backend="numpy"), args.repeat)
            if not (np.array_equal(Sn, Sp) and np.array_equal(Kn, Kp)):
                raise SystemExit(f"backends disagree on {name} ({method})")
            print(f"{name:<26}{len(T):>9}{method:>13}{1e3 * tn:>11.2f}{1e3 * tp:>11.2f}{tp / tn:>8.1f}x")


if __name__ == "__main__":
    main()
