"""Compare the numba and numpy Monte Carlo backends.

    python3 benchmarks/bench_kernels.py --gates 20000000

Times a full single-threaded ``mc_run`` per backend on the preset fringe
point and checks the two tallies are identical.
"""

import argparse
import time

from tbsim.config import paper_config
from tbsim.engines import mc_run
from tbsim.engines._kernels import HAVE_NUMBA


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gates", type=int, default=10**7)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scenario", choices=("car", "fringe"), default="fringe")
    args = ap.parse_args()

    cfg = paper_config(args.scenario)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if HAVE_NUMBA:
        mc_run(cfg, 1000, 0, mu=0.1, threads=1, backend="numba")  # compile outside the timing

    results = {}
    for b in backends:
        t, rec = best_of(lambda: mc_run(cfg, args.gates, 1, mu=0.1, threads=1, backend=b), args.repeat)
        results[b] = (t, rec)
        print(f"{b:>6}: {t:7.3f} s  ({args.gates / t / 1e6:6.1f} Mgates/s)")
    if len(results) == 2:
        (t_np, r_np), (t_nb, r_nb) = results["numpy"], results["numba"]
        print(f"speedup {t_np / t_nb:.2f}x, tallies identical: {r_np == r_nb}")


if __name__ == "__main__":
    main()
