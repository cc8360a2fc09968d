"""Time the twist kernel on both backends.

    python3 benchmarks/bench_kernels.py --sizes 1000 10000 100000 --repeat 5
"""
import argparse
import time

import numpy as np

from rsk import geometry as geo
from rsk._accel import HAS_NUMBA
from rsk.kernels import twist_apply, warmup


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if HAS_NUMBA:
        warmup()
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>8} {'mode':>8} " + " ".join(f"{b:>12}" for b in backends) + "   speedup   max|diff|")
    for n in args.sizes:
        P, Q = geo.random_points(rng, n)
        B = geo.frame(P, Q)
        S = B[:, 0] + B[:, 3]
        for mode in ("points", "tangent"):
            if mode == "points":
                calls = {b: (lambda b=b: twist_apply(P, Q, m=args.m, delta=args.delta, backend=b)) for b in backends}
            else:
                calls = {b: (lambda b=b: twist_apply(P, Q, S[:, :3], S[:, 3:], m=args.m, delta=args.delta, backend=b))
                         for b in backends}
            times = {b: best_time(c, args.repeat) for b, c in calls.items()}
            outs = {b: c() for b, c in calls.items()}
            diff = 0.0
            if len(backends) == 2:
                a, b = outs["numpy"], outs["numba"]
                diff = float(np.max(np.abs(a[0] - b[0])))
                if mode == "tangent":
                    diff = max(diff, float(np.max(np.abs(a[1] - b[1]))))
            speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
            cols = " ".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
            print(f"{n:>8} {mode:>8} {cols}   {speed:7.1f}x   {diff:.1e}")


if __name__ == "__main__":
    main()
