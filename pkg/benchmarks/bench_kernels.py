"""Throughput of the batch NJ kernel: numba loop vs vectorised numpy.

    python benchmarks/bench_kernels.py --samples 50000 --taxa 4 5 6 8
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from njcones.harness.simulate import draw_chunk
from njcones.kernels import HAVE_NUMBA, nj_batch


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--taxa", type=int, nargs="+", default=[4, 5, 6, 8])
    ap.add_argument("--policy", default="uniform")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'n':>3} {'backend':>8} {'seconds':>9} {'samples/s':>12}  agree")
    for n in args.taxa:
        X, U = draw_chunk(n, 1, 0, args.samples)
        out = {}
        for b in backends:
            nj_batch(X[:10], U[:10], n, args.policy, b)  # compile / warm up
            out[b] = nj_batch(X, U, n, args.policy, b)
            dt = best_of(lambda: nj_batch(X, U, n, args.policy, b), args.repeat)
            same = all(np.array_equal(x, y) for x, y in zip(out[b], out["numpy"]))
            print(f"{n:>3} {b:>8} {dt:>9.4f} {args.samples / dt:>12.0f}  {same}")
    t0 = time.perf_counter()
    draw_chunk(args.taxa[-1], 1, 0, args.samples)
    dt = time.perf_counter() - t0
    print(f"sampling alone (n={args.taxa[-1]}): {dt:.4f}s, {args.samples / dt:.0f} samples/s")


if __name__ == "__main__":
    main()
