"""Compare the compiled kernels with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Prints per-call timings for each hot kernel under both implementations, then
the wall time of a short search run in a subprocess per backend (the backend
is fixed at import, so the end-to-end run needs a fresh interpreter).
"""
import argparse
import os
import random
import subprocess
import sys
import timeit

from mgss2 import _fallback, dist
from mgss2.othello import DEFAULT_WEIGHTS, random_opening

try:
    from mgss2 import _speedups
except ImportError:
    _speedups = None

SEARCH_SNIPPET = """
import random, time
from mgss2 import BACKEND, Othello, VocParams, default_calibration, mgss2_search
from mgss2.othello import random_opening
game, cal = Othello(), default_calibration()
rng = random.Random(3)
boards = [random_opening(16, rng)[0] for _ in range(4)]
t = time.perf_counter()
evals = 0
for i, b in enumerate(boards):
    _, stats, _ = mgss2_search(game, b, cal, VocParams(kappa=0.3), random.Random(i))
    evals += stats.evaluations
print(BACKEND, evals, round(time.perf_counter() - t, 3))
"""


def kernel_cases(mod, table):
    rng = random.Random(1)
    boards = [random_opening(rng.randint(4, 50), rng)[0] for _ in range(64)]
    kern = mod.BackupKernel(table.zmin, table.step, table.values, table.slopes,
                            table.saturation)
    ev = mod.StaticEvaluator(DEFAULT_WEIGHTS, 5, 1, 16)
    # flat (kind, l, mu, sigma, bound) records from the parent upward
    stages = [mod.MAX_KIND, 4, 0.3, 1.2, -0.8, mod.MIN_KIND, 3, -0.2, 0.9, 1.5,
              mod.MAX_KIND, 6, 0.1, 1.5, -1.1]

    def legal():
        for b in boards:
            mod.legal_mask(b.mover, b.opponent)

    def evaluate():
        for b in boards:
            ev.black(b.black, b.white)

    def bmin():
        for i in range(64):
            kern.bmin(1 + i % 30, 0.2, 1.3, -2.0 + i / 16)

    def compose():
        for i in range(64):
            kern.compose(stages, -2.0 + i / 16)

    def benefit():
        kern.benefit(mod.MIN_KIND, 5, 2, 0.0, 1.0, 0.4, stages, -0.6)

    return {"legal_mask x64": legal, "evaluate x64": evaluate, "bmin x64": bmin,
            "compose x64": compose, "benefit x1": benefit}


def best_time(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-search", action="store_true", help="skip the end-to-end run")
    args = ap.parse_args(argv)

    table = dist.default_table()
    py = kernel_cases(_fallback, table)
    cy = kernel_cases(_speedups, table) if _speedups else None
    print(f"{'kernel':<16}{'python us':>12}{'cython us':>12}{'speedup':>10}")
    for name, fn in py.items():
        tp = best_time(fn, args.repeat) * 1e6
        if cy:
            tc = best_time(cy[name], args.repeat) * 1e6
            print(f"{name:<16}{tp:>12.1f}{tc:>12.1f}{tp / tc:>9.1f}x")
        else:
            print(f"{name:<16}{tp:>12.1f}{'n/a':>12}")

    if args.no_search:
        return
    print("\nend-to-end search (4 positions, kappa 0.3): backend evaluations seconds")
    for pure in ("1", ""):
        env = dict(os.environ, MGSS2_PURE=pure)
        out = subprocess.run([sys.executable, "-c", SEARCH_SNIPPET], env=env,
                             capture_output=True, text=True, check=True).stdout
        print("  " + out.strip())


if __name__ == "__main__":
    main()
