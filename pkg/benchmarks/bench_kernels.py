"""Compare the compiled and numpy grid-search kernels.

    python3 benchmarks/bench_kernels.py --grid-deg 2 --repeat 3

Both backends must return identical (value, i, j); the script exits 1 if not.
"""
from __future__ import annotations

import argparse
import sys
import time

from nvpolar import kernels
from nvpolar.geometry import family_axes
from nvpolar.optimizer import hemisphere_grid
from nvpolar.photophysics import excitation_array


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid-deg", type=float, default=2.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    _, vecs = hemisphere_grid(args.grid_deg)
    X = excitation_array(family_axes(), vecs)
    pairs = len(X) ** 2
    print(f"grid {args.grid_deg} deg: {len(X)} directions, {pairs:.3g} pairs, threads={args.threads}")
    backends = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])
    status = 0
    for target in ("relative_contrast", "chi"):
        results = {}
        for name in backends:
            t, res = best_time(
                lambda: kernels.grid_argmax(X, X, 0, target, threads=args.threads, backend=name), args.repeat
            )
            results[name] = (t, res)
            print(f"  {target:17s} {name:8s} {t:8.3f} s  {pairs / t / 1e6:9.1f} Mpairs/s  value={res[0]:.12f}")
        if "compiled" in results:
            same = results["compiled"][1] == results["python"][1]
            speedup = results["python"][0] / results["compiled"][0]
            print(f"  {target:17s} speedup {speedup:.1f}x, identical results: {same}")
            status |= not same
    return status


if __name__ == "__main__":
    sys.exit(main())
