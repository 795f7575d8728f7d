"""Compare the compiled and pure-numpy Pfaffian kernels.

    python3 benchmarks/bench_pfaffian.py [--sizes 4 8 16 32] [--batch 200]
"""

import argparse
import timeit

import numpy as np

from matchbench import kernels


def stack(rng, batch, d, cx):
    a = rng.standard_normal((batch, d, d))
    if cx:
        a = a + 1j * rng.standard_normal((batch, d, d))
    return a - np.swapaxes(a, 1, 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    ap.add_argument("--batch", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled kernel not available; timing the fallback only")
    rng = np.random.default_rng(0)
    print(f"{'dim':>4} {'dtype':>8} " + " ".join(f"{name + ' ms':>12}" for name in impls) + "   speedup")
    for d in args.sizes:
        for cx in (False, True):
            base = stack(rng, args.batch, d, cx)
            times = {}
            vals = {}
            for name, mod in impls.items():
                vals[name] = mod.pfaffian_batch(base.copy())
                t = min(timeit.repeat(lambda: mod.pfaffian_batch(base.copy()), number=1, repeat=args.repeat))
                times[name] = 1e3 * t
            ref = vals["python"]
            for v in vals.values():
                assert np.allclose(v, ref, rtol=1e-8, atol=1e-8)
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            cells = " ".join(f"{times[name]:12.3f}" for name in impls)
            print(f"{d:>4} {'complex' if cx else 'real':>8} {cells}   {speed:7.1f}x")


if __name__ == "__main__":
    main()
