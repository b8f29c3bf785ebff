"""Compare the compiled and numpy Koszul-sign kernels.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

import numpy as np

from gbfpos import _kernels_py, kernels

try:
    from gbfpos import _kernels as _compiled
except ImportError:
    _compiled = None


def cases(rng):
    # (slot count, slot dim): grids of 2^2 up to 3^6 entries
    for k, d in ((2, 2), (4, 2), (4, 3), (6, 2), (6, 3), (8, 2)):
        fdegs = [rng.integers(0, 2, size=d) for _ in range(k)]
        perm = list(rng.permutation(k))
        yield k, d, fdegs, perm


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    impls = {"python": _kernels_py.koszul_parity}
    if _compiled is not None:
        impls["cython"] = _compiled.koszul_parity
    else:
        print("compiled kernel not built; timing the fallback only")
    print(f"{'slots':>5} {'dim':>4} {'entries':>8} " + " ".join(f"{n + ' us':>11}" for n in impls)
          + ("   speedup" if len(impls) == 2 else ""))
    for k, d, fdegs, perm in cases(rng):
        pairs = kernels.inverted_pairs(perm)
        ref = kernels.koszul_signs(fdegs, pairs, impl=impls["python"])
        times = {}
        for name, impl in impls.items():
            assert np.array_equal(kernels.koszul_signs(fdegs, pairs, impl=impl), ref)
            t = timeit.timeit(lambda: kernels.koszul_signs(fdegs, pairs, impl=impl),
                              number=args.repeat)
            times[name] = 1e6 * t / args.repeat
        line = f"{k:>5} {d:>4} {d ** k:>8} " + " ".join(f"{v:>11.1f}" for v in times.values())
        if len(times) == 2:
            line += f"   {times['python'] / times['cython']:>6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
