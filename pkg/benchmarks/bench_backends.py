#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

The backend is fixed at import time via FISHER_PINN_BACKEND, so this
script re-executes itself once per backend and prints a side-by-side
table: training-scale jet forward+backward passes, plain value passes,
and the finite-difference sweep.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_suite(repeats: int) -> dict:
    import numpy as np

    from fisher_pinn import _kernels, fdm, network, physics

    arch = network.Architecture()  # 7 x 50
    theta = network.xavier_init(arch, 0)
    sizes = np.asarray(arch.layer_sizes(), dtype=np.int64)
    rng = np.random.default_rng(1)
    n = 10_000
    t = rng.uniform(0, 1, n)
    x = rng.uniform(0, 1, n)

    def best_of(fn, warmup=1):
        for _ in range(warmup):
            fn()
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    results = {"backend": _kernels.BACKEND}

    def jet_pass():
        u, ut, ux, uxx, a0, acts, zjets = _kernels.mlp_jet_forward(
            theta, sizes, t, x)
        _kernels.mlp_jet_backward(theta, sizes, a0, acts, zjets,
                                  u, ut, ux, uxx)

    results["jet_fwd_bwd_10k"] = best_of(jet_pass)

    def value_pass():
        u, a0, cache = _kernels.mlp_value_forward(theta, sizes, t, x)
        _kernels.mlp_value_backward(theta, sizes, a0, cache, u)

    results["value_fwd_bwd_10k"] = best_of(value_pass)

    p = physics.PdeParams()
    dom = physics.Domain()
    grid = fdm.Grid.from_domain(dom)

    results["fdm_201x1600"] = best_of(
        lambda: fdm.solve(p, dom, grid, keep_history=False))
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--suite", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.suite:
        print(json.dumps(run_suite(args.repeats)))
        return

    rows = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, FISHER_PINN_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--suite",
             "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True)
        if out.returncode != 0:
            print(f"{backend}: failed\n{out.stderr}", file=sys.stderr)
            continue
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    keys = [k for k in rows[0] if k != "backend"]
    header = f"{'kernel':<22}" + "".join(f"{r['backend']:>14}" for r in rows)
    print(header)
    print("-" * len(header))
    for k in keys:
        line = f"{k:<22}"
        for r in rows:
            line += f"{r[k] * 1e3:>12.2f}ms"
        print(line)
    if len(rows) == 2:
        print()
        for k in keys:
            ratio = rows[0][k] / rows[1][k]
            print(f"{k}: {rows[1]['backend']} is {ratio:.2f}x vs "
                  f"{rows[0]['backend']}")


if __name__ == "__main__":
    main()
