#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-Python fallback.

Runs each hot kernel on identical random inputs under both backends,
verifies the outputs match exactly (tie handling included), and prints
per-kernel timings. Run from the repo root after an editable install:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --length 512 --dp-size 80
"""

import argparse
import sys
import time

import numpy as np

from spanalign._kernels import _pykernels

try:
    from spanalign._kernels import _ckernels
except ImportError:
    _ckernels = None


def timed(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_best_span(rng, args):
    cases = [
        (rng.random(args.length), rng.random(args.length))
        for _ in range(args.cases)
    ]

    def run(mod):
        return [mod.best_span_kernel(p1, p2) for p1, p2 in cases]

    return len(cases), run, lambda a, b: a == b


def bench_top_k(rng, args):
    cases = [
        (rng.random(args.length), rng.random(args.length))
        for _ in range(max(args.cases // 5, 1))
    ]

    def run(mod):
        return [mod.top_k_spans_kernel(p1, p2, 20) for p1, p2 in cases]

    def same(a, b):
        return all(
            all(np.array_equal(x, y) for x, y in zip(ra, rb))
            for ra, rb in zip(a, b)
        )

    return len(cases), run, same


def bench_dp(rng, args):
    n = args.dp_size
    cases = []
    for _ in range(max(args.cases // 100, 1)):
        tables = [rng.random((n, n)) for _ in range(4)]
        pen = np.array([0.0, 0.25, 0.25, 0.05, 0.05, 0.10])
        cases.append((*tables, pen))

    def run(mod):
        return [mod.dp_solve_kernel(*case) for case in cases]

    def same(a, b):
        return all(
            sa == sb and np.array_equal(ca, cb)
            for (sa, ca), (sb, cb) in zip(a, b)
        )

    return len(cases), run, same


BENCHES = [
    ("best_span", bench_best_span),
    ("top_k_spans", bench_top_k),
    ("dp_solve", bench_dp),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cases", type=int, default=2000,
                        help="best_span case count; others scale from it")
    parser.add_argument("--length", type=int, default=384,
                        help="probability vector length")
    parser.add_argument("--dp-size", type=int, default=60,
                        help="sentences per side for the DP tables")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats; the best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not importable; timing fallback only",
              file=sys.stderr)

    rng = np.random.default_rng(args.seed)
    header = f"{'kernel':<14}{'cases':>7}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    mismatched = False
    for name, setup in BENCHES:
        count, run, same = setup(rng, args)
        py_t, py_out = timed(lambda: run(_pykernels), args.repeats)
        if _ckernels is None:
            print(f"{name:<14}{count:>7}{py_t * 1e3:>10.1f} ms{'-':>12}{'-':>10}")
            continue
        c_t, c_out = timed(lambda: run(_ckernels), args.repeats)
        if not same(py_out, c_out):
            mismatched = True
            print(f"{name:<14} BACKEND OUTPUTS DIFFER", file=sys.stderr)
            continue
        print(f"{name:<14}{count:>7}{py_t * 1e3:>10.1f} ms"
              f"{c_t * 1e3:>10.1f} ms{py_t / c_t:>9.1f}x")
    if _ckernels is not None and not mismatched:
        print("backends agree on all outputs")
    return 1 if mismatched else 0


if __name__ == "__main__":
    raise SystemExit(main())
