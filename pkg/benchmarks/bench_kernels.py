"""Time the compiled and pure-Python kernels on the same random instances.

Run with ``python3 benchmarks/bench_kernels.py [--instances N] [--repeat R]``.
"""

import argparse
import timeit

import numpy as np

from cofsec import kernels
from cofsec.cof import gram_factor, gram_matrix
from cofsec.oracles import random_instance


def workload(n: int, K: int):
    macs = [random_instance(seed, K, label="bench").mac for seed in range(n)]
    grams = [gram_matrix(m) for m in macs]
    factors = [gram_factor(m) for m in macs]
    return grams, factors


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--K", type=int, nargs="+", default=[3, 5])
    args = ap.parse_args()

    impls = kernels.backends()
    print(f"{'K':>2} {'kernel':<18} " + " ".join(f"{name:>12}" for name in impls) + "   speedup")
    for K in args.K:
        grams, factors = workload(args.instances, K)
        bases = [impls["python"].lll_reduce_gram(Q) for Q in grams]
        for label, run in (
            ("lll_reduce_gram", lambda impl: [impl.lll_reduce_gram(Q) for Q in grams]),
            ("successive_sigma2", lambda impl: [impl.successive_sigma2(F, A) for F, A in zip(factors, bases)]),
        ):
            per_call = {}
            for name, impl in impls.items():
                best = min(timeit.repeat(lambda: run(impl), number=1, repeat=args.repeat))
                per_call[name] = best / args.instances
            cells = " ".join(f"{1e6 * t:10.1f}us" for t in per_call.values())
            speed = per_call["python"] / per_call["cython"] if "cython" in per_call else np.nan
            print(f"{K:>2} {label:<18} {cells}   {speed:6.1f}x")


if __name__ == "__main__":
    main()
