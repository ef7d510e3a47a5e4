"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each case runs on identical inputs for both backends; outputs are checked
for bit equality before timings are reported.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from cycletime import kernels
from cycletime.law import example1_law, index_batch
from cycletime.scenarios import example2_law


def _cases():
    ex2 = example2_law(0.5)
    ex1 = example1_law(0.3, 0.2)
    rng = np.random.default_rng(0)
    dense = rng.normal(size=(3, 8, 8))
    dense[rng.random(dense.shape) < 0.3] = -np.inf
    seqs = index_batch(ex2, 10_000, 1, 1000)
    dense_seqs = rng.integers(0, 3, size=(64, 5_000))
    chain = ex1._cum
    u = rng.random((1000, 10_000))
    start = rng.integers(0, 4, size=1000)
    return {
        "forward d=3, T=1000, n=1e4": (kernels.forward_vectors, (ex2.stack, seqs, np.zeros(3))),
        "forward d=8, T=64, n=5e3": (kernels.forward_vectors, (dense, dense_seqs, np.zeros(8))),
        "fold d=3, n=1e4": (kernels.fold_products, (ex2.stack, seqs[0])),
        "fold d=8, n=5e3": (kernels.fold_products, (dense, dense_seqs[0])),
        "markov S=4, T=1000, n=1e4": (kernels.markov_paths, (chain, start, u)),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return bool(np.array_equal(a, b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    names = sorted(backends)
    rows = []
    for label, (fn, fargs) in _cases().items():
        outs, times = {}, {}
        for name in names:
            mod = backends[name]
            outs[name] = fn(*fargs, backend=mod)
            times[name] = min(timeit.repeat(lambda: fn(*fargs, backend=mod), number=1, repeat=args.repeat))
        identical = all(_same(outs[names[0]], outs[n]) for n in names[1:])
        rows.append({"case": label, "seconds": times, "identical": identical})

    width = max(len(r["case"]) for r in rows)
    head = f"{'case':<{width}}  " + "  ".join(f"{n:>10}" for n in names)
    if len(names) > 1:
        head += "   speedup  identical"
    print(head)
    for r in rows:
        line = f"{r['case']:<{width}}  " + "  ".join(f"{r['seconds'][n]:>9.4f}s" for n in names)
        if len(names) > 1:
            line += f"  {r['seconds']['numpy'] / r['seconds']['cython']:>7.1f}x  {r['identical']!s:>9}"
        print(line)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0 if all(r["identical"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
