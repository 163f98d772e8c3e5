"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--rows 20000] [--repeat 3]

Both variants are imported side by side, so the backend switch does not
matter here. The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from hamselect import kernels
from hamselect._jit import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rows, rng):
    lg = rng.normal(0.0, 2.0, size=(rows, 30))
    lg200 = rng.normal(0.0, 2.0, size=(max(rows // 20, 1), 200))
    z = rng.chisquare(5, size=rows * 10) + 10.0
    return [
        ("bayes_margins d=30 s=3", "bayes_margins_rows", (lg, 3)),
        ("bayes_margins d=200 s=20", "bayes_margins_rows", (lg200, 20)),
        ("log_esym d=30 m=10", "log_esym_rows", (lg, 10)),
        ("scan d=30 s=3", "scan_rows", (lg, 3)),
        ("chi2 log-ratio k=5 a2=30", "chi2_log_lr", (z, 5.0, 30.0)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<28}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max |diff|':>14}")
    for label, name, call_args in cases(args.rows, rng):
        nb_fn = getattr(kernels, name + "_nb")
        np_fn = getattr(kernels, name + "_np")
        ref = nb_fn(*call_args)  # warm-up
        other = np_fn(*call_args)
        pairs = zip(ref, other) if isinstance(ref, tuple) else [(ref, other)]
        diff = max(float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)),
                                initial=0.0, where=np.isfinite(np.asarray(a, float))))
                   for a, b in pairs)
        t_nb = best_of(lambda: nb_fn(*call_args), args.repeat)
        t_np = best_of(lambda: np_fn(*call_args), args.repeat)
        print(f"{label:<28}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
