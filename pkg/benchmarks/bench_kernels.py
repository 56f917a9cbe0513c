"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 200]

Batch sizes match an optimizer epoch (30 members, dim 10) and a larger
stress case. A whole PMF run is also timed under each backend by
re-importing the package in a subprocess with ``PMF_PURE_PYTHON`` set.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pmf import _pykernels as py
from pmf.benchmarks import BaseFunction, make_problem

try:
    from pmf import _kernels as cy
except ImportError:
    cy = None

RUN_SNIPPET = (
    "import time; from pmf import run_pmf, RunConfig; from pmf.kernels import BACKEND;"
    "t=time.perf_counter(); run_pmf(RunConfig(seed=1)); print(BACKEND, time.perf_counter()-t)"
)


def bench_kernel(label, fn_py, fn_cy, repeat):
    t_py = min(timeit.repeat(fn_py, number=repeat, repeat=3)) / repeat
    row = f"{label:<34} python {t_py * 1e6:9.1f} us"
    if fn_cy is not None:
        t_cy = min(timeit.repeat(fn_cy, number=repeat, repeat=3)) / repeat
        row += f"   cython {t_cy * 1e6:9.1f} us   speedup {t_py / t_cy:6.1f}x"
    print(row)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; timing the fallback only")
    rng = np.random.default_rng(0)
    for n, d in ((30, 10), (300, 50)):
        X = rng.uniform(-100, 100, (n, d))
        for kind in (BaseFunction.RASTRIGIN, BaseFunction.ZAKHAROV):
            p = make_problem(kind, d, seed=0)
            a = (kind.code, X, p.shift, p.rotation, p._scale, p._offset, p.bias)
            bench_kernel(f"{kind.value} batch {n}x{d}",
                         lambda: py.transformed_batch(*a),
                         (lambda: cy.transformed_batch(*a)) if cy else None, args.repeat)
        bench_kernel(f"pairwise distance {n}x{d}",
                     lambda: py.mean_pairwise_distance(X),
                     (lambda: cy.mean_pairwise_distance(X)) if cy else None, args.repeat)
    for flag in ("1", "0"):
        env = dict(os.environ, PMF_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"full run (f1_like, 10000 evals)     {out[0]:<7}{float(out[1]):.3f} s")


if __name__ == "__main__":
    main()
