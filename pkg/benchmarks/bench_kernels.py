"""Compare the compiled and pure-Python rate kernels.

Run with ``python3 benchmarks/bench_kernels.py [--reps N]``. Both backends
are fed identical inputs; the largest rate difference is printed next to
the timings.
"""
import argparse
import timeit

import numpy as np

from csiregion import _pykernels

try:
    from csiregion import _ckernels
except ImportError:
    _ckernels = None


def _inputs(rng, batch, n_bs, k):
    shape = (batch, n_bs, k)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return np.ascontiguousarray(h), np.full((n_bs, k), 0.05), np.full((n_bs, k), 0.1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=10)
    ap.add_argument("--reps", type=int, default=2)
    args = ap.parse_args()
    h, e_ut, e_bs = _inputs(np.random.default_rng(0), args.batch, 4, 4)
    cases = {
        "ul_optimize_batch": lambda m: m.ul_optimize_batch(h, e_ut, 0.1, 1.0),
        "dl_optimize_batch": lambda m: m.dl_optimize_batch(h, e_ut, e_bs, 0.1, 1.0),
    }
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["compiled"] = _ckernels
    print(f"{'kernel':<20}{'backend':<10}{'best [ms]':>12}{'per channel [ms]':>18}")
    for name, fn in cases.items():
        times, rates = {}, {}
        for label, mod in backends.items():
            rates[label] = np.asarray(fn(mod)[0])
            times[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.reps))
            print(f"{name:<20}{label:<10}{1e3 * times[label]:>12.1f}{1e3 * times[label] / args.batch:>18.3f}")
        if len(times) == 2:
            diff = float(np.max(np.abs(rates["compiled"] - rates["python"])))
            print(f"{'':<20}speedup {times['python'] / times['compiled']:.1f}x, max |rate diff| {diff:.1e}")
    if _ckernels is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
