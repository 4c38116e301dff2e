"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--n 24] [--repeat 5]

Times the preference matrix and one shares step at size n, checks that both
backends agree bitwise, then times a full baseline run under each backend
in a fresh interpreter (backend choice is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from powerladder import _kernels_py

try:
    from powerladder import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

RUN_SNIPPET = (
    "import time; from powerladder import scenario, techdata;"
    "cfg = scenario.read_config(techdata.default_data_dir() / 'baseline.cfg');"
    "reg, res = scenario.load_data(cfg); t = time.perf_counter();"
    "scenario.run(cfg, reg, res); print(time.perf_counter() - t)"
)


def inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    shares = rng.dirichlet(np.ones(n))
    median = rng.uniform(20, 200, n)
    spread = 0.1 * median
    freq = 36.0 / np.outer(rng.uniform(20, 60, n), rng.uniform(1, 6, n))
    gmax, gmin = rng.uniform(0, 1, n), rng.uniform(0, 1, n)
    return shares, median, spread, freq, gmax, gmin


def time_backend(mod, n, repeat):
    shares, median, spread, freq, gmax, gmin = inputs(n)
    pref = mod.preference_matrix(median, spread)
    number = max(1, 20000 // n)
    t_pref = min(timeit.repeat(lambda: mod.preference_matrix(median, spread),
                               number=number, repeat=repeat)) / number
    t_step = min(timeit.repeat(lambda: mod.share_deltas(shares, freq, pref, gmax, gmin, 0.25),
                               number=number, repeat=repeat)) / number
    return t_pref, t_step, pref, mod.share_deltas(shares, freq, pref, gmax, gmin, 0.25)


def time_run(backend):
    env = dict(os.environ, POWERLADDER_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=24)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--no-run", action="store_true", help="skip full scenario timing")
    args = parser.parse_args()

    py = time_backend(_kernels_py, args.n, args.repeat)
    print(f"n = {args.n}")
    print(f"{'kernel':<20}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    if _kernels_c is None:
        print("compiled extension not built; only the python backend is available")
        rows = [("preference_matrix", py[0], None), ("share_deltas", py[1], None)]
    else:
        cy = time_backend(_kernels_c, args.n, args.repeat)
        rows = [("preference_matrix", py[0], cy[0]), ("share_deltas", py[1], cy[1])]
        same = np.array_equal(py[2], cy[2]) and np.array_equal(py[3], cy[3])
    for name, tp, tc in rows:
        tc_s = f"{tc * 1e6:14.2f}{tp / tc:10.1f}" if tc else f"{'-':>14}{'-':>10}"
        print(f"{name:<20}{tp * 1e6:14.2f}{tc_s}")
    if _kernels_c is not None:
        print(f"bitwise identical results: {same}")
    if not args.no_run:
        print(f"baseline run, python backend: {time_run('python'):.3f} s")
        if _kernels_c is not None:
            print(f"baseline run, cython backend: {time_run('cython'):.3f} s")


if __name__ == "__main__":
    main()
