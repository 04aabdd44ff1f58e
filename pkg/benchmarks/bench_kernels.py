"""Compare the compiled and pure-Python tape kernels on the demonstration system.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from jointplan import kernels
from jointplan.nlp import assemble
from jointplan.testcase import build_testcase


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    system = assemble(build_testcase(1))
    tape = system.tape
    rng = np.random.default_rng(0)
    x = np.clip(rng.normal(size=system.n), system.lo, system.hi)
    w = rng.normal(size=system.m)
    impls = kernels.backends()
    print(f"system: {system.n} variables, {system.m} rows; backends: {', '.join(impls)}")
    calls = {
        "residuals": lambda k: kernels.residuals(tape, x, 1e-4, impl=k),
        "jacobian": lambda k: kernels.jac_contrib(tape, x, 1e-4, impl=k),
        "hessian": lambda k: kernels.hess_contrib(tape, x, w, 1e-4, impl=k),
    }
    for name, fn in calls.items():
        times = {}
        for label, impl in impls.items():
            times[label] = min(timeit.repeat(lambda: fn(impl), number=args.repeat, repeat=3)) / args.repeat
        if len(impls) > 1:
            diff = np.max(np.abs(fn(impls["compiled"]) - fn(impls["python"])))
            extra = f"  speedup {times['python'] / times['compiled']:.1f}x  max diff {diff:.1e}"
        else:
            extra = ""
        cols = "  ".join(f"{k} {v * 1e6:8.1f} us" for k, v in times.items())
        print(f"{name:10s} {cols}{extra}")


if __name__ == "__main__":
    main()
