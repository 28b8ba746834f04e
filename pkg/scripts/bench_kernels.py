#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallbacks.

The kernel path is fixed at import time by the TEXTCROP_NUMBA env flag, so
this script re-executes itself once per mode and prints a comparison table:

    python3 scripts/bench_kernels.py
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, *args, repeats: int) -> float:
    fn(*args)  # warm up (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def run_worker(repeats: int) -> dict:
    from textcrop import _kernels
    from textcrop.window_search import best_position, window_set

    rng = np.random.default_rng(0)

    grid = rng.random((96, 96))
    specs = window_set(96, 96, 14)

    def sweep():
        for spec in specs:
            best_position(grid, spec)

    text_a = "".join(rng.choice(list("abcdefgh "), size=400))
    text_b = "".join(rng.choice(list("abcdefgh "), size=400))
    a = np.array([ord(c) for c in text_a], dtype=np.int64)
    b = np.array([ord(c) for c in text_b], dtype=np.int64)

    vectors = rng.normal(size=(3000, 256))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)

    return {
        "numba": _kernels.USING_NUMBA,
        "window_sweep": _time(sweep, repeats=repeats),
        "levenshtein_400": _time(_kernels.levenshtein, a, b, repeats=repeats),
        "dedup_3000x256": _time(
            _kernels.greedy_dedup, vectors, 0.95, repeats=repeats),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per workload (best-of)")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker:
        json.dump(run_worker(args.repeats), sys.stdout)
        return 0

    results = {}
    for label, flag in [("numba", "1"), ("numpy", "0")]:
        env = dict(os.environ, TEXTCROP_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--worker", "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout)

    if results["numba"]["numba"] is results["numpy"]["numba"]:
        print("warning: both runs used the same kernel path "
              "(is numba installed?)", file=sys.stderr)

    workloads = ["window_sweep", "levenshtein_400", "dedup_3000x256"]
    print(f"{'workload':<18} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9}")
    for name in workloads:
        jit = results["numba"][name]
        plain = results["numpy"][name]
        ratio = plain / jit if jit > 0 else float("inf")
        print(f"{name:<18} {jit:>12.6f} {plain:>12.6f} {ratio:>8.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
